#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgechain/bytes.hpp"
#include "edgechain/crypto.hpp"
#include "edgechain/rng.hpp"
#include "edgechain/types.hpp"

namespace edgechain::identity {

// Issuer id of the bootstrap authority that certifies edge nodes.
inline constexpr std::string_view kAuthorityId = "authority";

struct Certificate {
  DeviceId device_id;
  crypto::PublicKey public_key;
  DeviceId issuer_id;
  std::uint64_t issue_epoch = 0;
  crypto::Signature signature;

  // Signed bytes: domain tag, then the four bound fields in order.
  Bytes payload() const {
    ByteWriter w;
    w.str("edgechain/cert/v1").str(device_id).raw(public_key.bytes).str(issuer_id).u64(issue_epoch);
    return std::move(w).take();
  }
};

struct CredentialBundle {
  DeviceId device_id;
  crypto::PublicKey public_key;
  crypto::SecretKey secret_key;
  Certificate certificate;
  Digest wallet_address{};
};

struct RegistryEntry {
  DeviceId device_id;
  crypto::PublicKey public_key;
  Certificate certificate;
  Role role = Role::infrastructure;
  CommunityId community = 0;
  Digest wallet_address{};
};

inline Digest wallet_of(const crypto::PublicKey& pk) { return crypto::sha256(pk.bytes); }

// Registration authority. Keys come from one seeded keygen stream, so a
// registry built from the same seed and the same call sequence is
// bit-identical. After setup it is read-only.
class Registry {
 public:
  explicit Registry(std::uint64_t seed) : keygen_(RngStream::derive(seed, "keygen")) {
    authority_ = crypto::keypair_from_seed(keygen_.seed_bytes());
  }

  void add_community(CommunityId id) { communities_.insert(id); }
  bool has_community(CommunityId id) const { return communities_.contains(id); }
  const std::set<CommunityId>& communities() const { return communities_; }

  // Edge nodes are issued by kAuthorityId; everything else by a registered
  // edge node, which signs with its own key.
  CredentialBundle register_device(const DeviceId& device_id, Role role, CommunityId community,
                                   std::string_view issuer_id) {
    if (device_id.empty() || device_id == kAuthorityId ||
        device_id.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error(Errc::invalid_device_id, "'" + device_id + "'");
    }
    if (entries_.contains(device_id)) throw Error(Errc::duplicate_device, device_id);
    if (!communities_.contains(community)) {
      throw Error(Errc::unknown_community, std::to_string(community));
    }
    const crypto::SecretKey* issuer_sk = nullptr;
    if (issuer_id == kAuthorityId) {
      issuer_sk = &authority_.secret_key;
    } else if (auto it = edge_keys_.find(std::string(issuer_id)); it != edge_keys_.end()) {
      issuer_sk = &it->second;
    } else {
      throw Error(Errc::unknown_issuer, std::string(issuer_id));
    }

    auto kp = crypto::keypair_from_seed(keygen_.seed_bytes());
    CredentialBundle bundle;
    bundle.device_id = device_id;
    bundle.public_key = kp.public_key;
    bundle.secret_key = kp.secret_key;
    bundle.wallet_address = wallet_of(kp.public_key);
    if (by_wallet_.contains(bundle.wallet_address) || by_key_.contains(kp.public_key)) {
      throw Error(Errc::wallet_collision, device_id);
    }
    bundle.certificate = Certificate{device_id, kp.public_key, std::string(issuer_id), next_epoch_++, {}};
    bundle.certificate.signature = crypto::sign(*issuer_sk, bundle.certificate.payload());

    RegistryEntry entry{device_id, kp.public_key, bundle.certificate, role, community, bundle.wallet_address};
    insert(std::move(entry));
    if (role == Role::edge_node) edge_keys_.emplace(device_id, kp.secret_key);
    return bundle;
  }

  bool verify_certificate(const Certificate& cert) const {
    const crypto::PublicKey* issuer_pk = nullptr;
    if (cert.issuer_id == kAuthorityId) {
      issuer_pk = &authority_.public_key;
    } else {
      auto it = entries_.find(cert.issuer_id);
      if (it == entries_.end() || it->second.role != Role::edge_node) return false;
      issuer_pk = &it->second.public_key;
    }
    auto subject = entries_.find(cert.device_id);
    if (subject == entries_.end() || subject->second.public_key != cert.public_key) return false;
    return crypto::verify(*issuer_pk, cert.payload(), cert.signature);
  }

  const RegistryEntry* find(std::string_view device_id) const {
    auto it = entries_.find(std::string(device_id));
    return it == entries_.end() ? nullptr : &it->second;
  }
  const RegistryEntry* find_by_key(const crypto::PublicKey& pk) const {
    auto it = by_key_.find(pk);
    return it == by_key_.end() ? nullptr : find(it->second);
  }
  const RegistryEntry* find_by_wallet(const Digest& wallet) const {
    auto it = by_wallet_.find(wallet);
    return it == by_wallet_.end() ? nullptr : find(it->second);
  }

  // The edge node managing a community (the community's level agent).
  const RegistryEntry& edge_node_of(CommunityId community) const {
    for (const auto& [id, e] : entries_) {
      if (e.role == Role::edge_node && e.community == community) return e;
    }
    throw Error(Errc::unknown_community, "no edge node for community " + std::to_string(community));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<DeviceId, RegistryEntry>& entries() const noexcept { return entries_; }
  const crypto::PublicKey& authority_key() const noexcept { return authority_.public_key; }

  // Checkpoint format (text, one record per line, entries sorted by id):
  //   edgechain-registry v1
  //   authority <pk-hex>
  //   community <id>
  //   device <id> <role> <community> <pk-hex> <wallet-hex> <issuer> <epoch> <sig-hex>
  std::string encode() const {
    std::ostringstream os;
    os << "edgechain-registry v1\n";
    os << "authority " << to_hex(authority_.public_key.bytes) << "\n";
    for (auto c : communities_) os << "community " << c << "\n";
    for (const auto& [id, e] : entries_) {
      os << "device " << id << ' ' << role_name(e.role) << ' ' << e.community << ' '
         << to_hex(e.public_key.bytes) << ' ' << to_hex(e.wallet_address) << ' '
         << e.certificate.issuer_id << ' ' << e.certificate.issue_epoch << ' '
         << to_hex(e.certificate.signature.bytes) << "\n";
    }
    return os.str();
  }

  // Restores a read-only registry: certificates verify, but no device can
  // issue new registrations (signing keys are never checkpointed).
  static Registry decode(const std::string& text) {
    Registry reg;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "edgechain-registry v1") {
      throw Error(Errc::malformed, "registry header");
    }
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string kind;
      ls >> kind;
      if (kind == "authority") {
        std::string hex;
        ls >> hex;
        reg.authority_.public_key.bytes = array_from_hex<32>(hex);
      } else if (kind == "community") {
        CommunityId c;
        if (!(ls >> c)) throw Error(Errc::malformed, "community line: " + line);
        reg.communities_.insert(c);
      } else if (kind == "device") {
        std::string id, role, pk, wallet, issuer, sig;
        CommunityId community;
        std::uint64_t epoch;
        if (!(ls >> id >> role >> community >> pk >> wallet >> issuer >> epoch >> sig)) {
          throw Error(Errc::malformed, "device line: " + line);
        }
        RegistryEntry e;
        e.device_id = id;
        if (role == role_name(Role::infrastructure)) {
          e.role = Role::infrastructure;
        } else if (role == role_name(Role::edge_node)) {
          e.role = Role::edge_node;
        } else {
          throw Error(Errc::malformed, "role '" + role + "'");
        }
        e.community = community;
        e.public_key.bytes = array_from_hex<32>(pk);
        e.wallet_address = array_from_hex<32>(wallet);
        e.certificate = Certificate{id, e.public_key, issuer, epoch, {}};
        e.certificate.signature.bytes = array_from_hex<64>(sig);
        reg.next_epoch_ = std::max(reg.next_epoch_, epoch + 1);
        reg.insert(std::move(e));
      } else {
        throw Error(Errc::malformed, "unknown record '" + kind + "'");
      }
    }
    return reg;
  }

 private:
  Registry() : keygen_(0) {}

  void insert(RegistryEntry entry) {
    by_key_.emplace(entry.public_key, entry.device_id);
    by_wallet_.emplace(entry.wallet_address, entry.device_id);
    auto id = entry.device_id;
    entries_.emplace(std::move(id), std::move(entry));
  }

  RngStream keygen_;
  crypto::KeyPair authority_;
  std::uint64_t next_epoch_ = 0;
  std::set<CommunityId> communities_;
  std::map<DeviceId, RegistryEntry> entries_;
  std::map<crypto::PublicKey, DeviceId> by_key_;
  std::map<Digest, DeviceId> by_wallet_;
  std::map<DeviceId, crypto::SecretKey> edge_keys_;
};

}  // namespace edgechain::identity
