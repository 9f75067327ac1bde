#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edgechain/bytes.hpp"
#include "edgechain/crypto.hpp"
#include "edgechain/identity.hpp"
#include "edgechain/rng.hpp"
#include "edgechain/trust.hpp"

namespace edgechain::messaging {

struct SupporterSignature {
  crypto::PublicKey supporter;
  crypto::Signature signature;
};

class Message {
 public:
  Bytes content;
  crypto::PublicKey sender_pk;
  crypto::PublicKey receiver_pk;
  crypto::Signature sender_sig;
  std::vector<SupporterSignature> supporter_sigs;
  // Simulation ground truth. Protocol code never branches on it; only the
  // supporter detection model (the adversary's opponent) consults it.
  bool is_illegal = false;
  Digest msg_id{};

  // Length-prefixed fields in declared order.
  Bytes payload() const {
    ByteWriter w;
    w.field(content).field(sender_pk.bytes).field(receiver_pk.bytes);
    return std::move(w).take();
  }

  bool sender_signature_valid() const { return crypto::verify(sender_pk, payload(), sender_sig); }

  Status status() const noexcept { return status_; }

  // Only 0 -> 1 and 0 -> -1; terminal states are absorbing.
  void set_status(Status next) {
    if (status_ != Status::processing || next == Status::processing) {
      throw Error(Errc::invalid_transition, "message status " + std::to_string(static_cast<int>(status_)) +
                                                " -> " + std::to_string(static_cast<int>(next)));
    }
    status_ = next;
  }

 private:
  Status status_ = Status::processing;
};

// What a supporter signs to endorse a message.
inline Bytes endorsement_payload(const Digest& msg_id) {
  ByteWriter w;
  w.str("edgechain/endorse/v1").raw(msg_id);
  return std::move(w).take();
}

struct EndorsementPolicy {
  std::uint32_t required_supporters = 8;
  double detection_prob = 0.2;
  // Probability a supporter flags a legal message; 0 in the default model.
  double false_flag_prob = 0.0;
  std::int64_t supporter_fee = 0;

  void validate() const {
    if (required_supporters < 1) throw Error(Errc::invalid_config, "supporters must be >= 1");
    if (!(detection_prob >= 0.0 && detection_prob <= 1.0)) {
      throw Error(Errc::invalid_config, "detection_prob must be in [0,1]");
    }
    if (!(false_flag_prob >= 0.0 && false_flag_prob <= 1.0)) {
      throw Error(Errc::invalid_config, "false_flag_prob must be in [0,1]");
    }
    if (supporter_fee < 0) throw Error(Errc::invalid_config, "supporter_fee must be >= 0");
  }
};

inline Message compose_message(Bytes content, const identity::CredentialBundle& sender,
                               const crypto::PublicKey& receiver_pk, const identity::Registry& registry) {
  if (content.empty()) throw Error(Errc::empty_content, sender.device_id);
  if (registry.find_by_key(sender.public_key) == nullptr) throw Error(Errc::unregistered_party, "sender " + sender.device_id);
  if (registry.find_by_key(receiver_pk) == nullptr) throw Error(Errc::unregistered_party, "receiver " + to_hex(receiver_pk.bytes));
  Message msg;
  msg.content = std::move(content);
  msg.sender_pk = sender.public_key;
  msg.receiver_pk = receiver_pk;
  const Bytes payload = msg.payload();
  msg.sender_sig = crypto::sign(sender.secret_key, payload);
  ByteWriter id;
  id.raw(payload).raw(msg.sender_sig.bytes);
  msg.msg_id = crypto::sha256(id.bytes());
  return msg;
}

enum class ScreenResult { pass, reject };

// The sender's edge node checks both parties' credit against the threshold.
inline ScreenResult screen_sender(Message& msg, const identity::Registry& registry, const trust::TrustLedger& ledger,
                                  const trust::TrustParams& params) {
  if (msg.status() != Status::processing) throw Error(Errc::invalid_transition, "screening a terminal message");
  const auto* sender = registry.find_by_key(msg.sender_pk);
  const auto* receiver = registry.find_by_key(msg.receiver_pk);
  if (sender == nullptr || receiver == nullptr) throw Error(Errc::unregistered_party, "screening");
  const double cs = trust::credit_infrastructure(ledger.record(sender->device_id), params);
  const double cr = trust::credit_infrastructure(ledger.record(receiver->device_id), params);
  if (cs >= params.credit_threshold && cr >= params.credit_threshold) return ScreenResult::pass;
  msg.set_status(Status::failed);
  return ScreenResult::reject;
}

struct SupporterCandidate {
  const identity::CredentialBundle* bundle = nullptr;
  double credit = 0.0;
  // Proximity class; lower tiers are preferred before credit is compared.
  std::uint32_t tier = 0;
};

struct EndorsementResult {
  bool endorsed = false;
  std::vector<DeviceId> supporters;
  std::optional<DeviceId> flagged_by;
};

// Picks the first p eligible candidates in (tier, -credit, device_id) order.
inline std::vector<const SupporterCandidate*> select_supporters(const Message& msg,
                                                                std::span<const SupporterCandidate> candidates,
                                                                std::uint32_t p, double credit_threshold) {
  std::vector<const SupporterCandidate*> eligible;
  std::set<crypto::PublicKey> seen;
  for (const auto& c : candidates) {
    if (c.bundle == nullptr || c.credit < credit_threshold) continue;
    if (c.bundle->public_key == msg.sender_pk) continue;
    if (!seen.insert(c.bundle->public_key).second) continue;
    eligible.push_back(&c);
  }
  if (eligible.size() < p) {
    throw Error(Errc::insufficient_supporters,
                std::to_string(eligible.size()) + " eligible, " + std::to_string(p) + " required");
  }
  std::partial_sort(eligible.begin(), eligible.begin() + p, eligible.end(), [](const auto* a, const auto* b) {
    if (a->tier != b->tier) return a->tier < b->tier;
    if (a->credit != b->credit) return a->credit > b->credit;
    return a->bundle->device_id < b->bundle->device_id;
  });
  eligible.resize(p);
  return eligible;
}

// Each selected supporter independently flags the message (probability d if
// illegal, false_flag_prob otherwise) or signs it. Exactly p uniforms are
// drawn per round so streams stay aligned regardless of the outcome.
inline EndorsementResult gather_endorsements(Message& msg, const EndorsementPolicy& policy,
                                             std::span<const SupporterCandidate> candidates, double credit_threshold,
                                             RngStream& rng) {
  if (msg.status() != Status::processing) throw Error(Errc::invalid_transition, "endorsing a terminal message");
  auto chosen = select_supporters(msg, candidates, policy.required_supporters, credit_threshold);

  EndorsementResult result;
  const double flag_prob = msg.is_illegal ? policy.detection_prob : policy.false_flag_prob;
  for (const auto* c : chosen) {
    const bool flags = rng.uniform01() < flag_prob;
    if (flags && !result.flagged_by) result.flagged_by = c->bundle->device_id;
    result.supporters.push_back(c->bundle->device_id);
  }
  if (result.flagged_by) {
    msg.set_status(Status::failed);
    return result;
  }

  const Bytes to_sign = endorsement_payload(msg.msg_id);
  msg.supporter_sigs.clear();
  for (const auto* c : chosen) {
    msg.supporter_sigs.push_back({c->bundle->public_key, crypto::sign(c->bundle->secret_key, to_sign)});
  }
  result.endorsed = true;
  return result;
}

// Shape check for an endorsed message: valid sender signature and exactly p
// distinct, verifying supporter signatures from parties other than the sender.
inline bool endorsement_valid(const Message& msg, std::uint32_t p) {
  if (msg.supporter_sigs.size() != p) return false;
  if (!msg.sender_signature_valid()) return false;
  const Bytes signed_bytes = endorsement_payload(msg.msg_id);
  std::set<crypto::PublicKey> seen;
  for (const auto& s : msg.supporter_sigs) {
    if (s.supporter == msg.sender_pk || !seen.insert(s.supporter).second) return false;
    if (!crypto::verify(s.supporter, signed_bytes, s.signature)) return false;
  }
  return true;
}

struct DeliveryRecord {
  Digest msg_id{};
  DeviceId sender;
  DeviceId receiver;
  std::vector<DeviceId> hops;
  std::vector<DeviceId> supporters;
  Status status = Status::accepted;
  std::uint64_t tick = 0;

  Bytes encode() const {
    ByteWriter w;
    w.raw(msg_id).str(sender).str(receiver);
    w.u32(static_cast<std::uint32_t>(hops.size()));
    for (const auto& h : hops) w.str(h);
    w.u32(static_cast<std::uint32_t>(supporters.size()));
    for (const auto& s : supporters) w.str(s);
    w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(status))).u64(tick);
    return std::move(w).take();
  }

  static DeliveryRecord decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    DeliveryRecord d;
    d.msg_id = r.fixed<32>();
    d.sender = r.str();
    d.receiver = r.str();
    for (auto n = r.u32(); n > 0; --n) d.hops.push_back(r.str());
    for (auto n = r.u32(); n > 0; --n) d.supporters.push_back(r.str());
    d.status = static_cast<Status>(static_cast<std::int8_t>(r.u8()));
    d.tick = r.u64();
    if (!r.done()) throw Error(Errc::malformed, "trailing bytes in delivery record");
    return d;
  }
};

// sender edge node -> receiver edge node (if different) -> receiver.
inline DeliveryRecord route_to_receiver(Message& msg, const identity::Registry& registry, std::uint32_t required_supporters,
                                        std::uint64_t tick) {
  if (msg.status() != Status::processing || !endorsement_valid(msg, required_supporters)) {
    throw Error(Errc::not_endorsed, to_hex(msg.msg_id));
  }
  const auto* sender = registry.find_by_key(msg.sender_pk);
  const auto* receiver = registry.find_by_key(msg.receiver_pk);
  if (sender == nullptr || receiver == nullptr) throw Error(Errc::unregistered_party, "routing");
  if (!registry.has_community(receiver->community)) throw Error(Errc::unknown_community, std::to_string(receiver->community));

  DeliveryRecord rec;
  rec.msg_id = msg.msg_id;
  rec.sender = sender->device_id;
  rec.receiver = receiver->device_id;
  const auto& from_edge = registry.edge_node_of(sender->community);
  const auto& to_edge = registry.edge_node_of(receiver->community);
  rec.hops.push_back(from_edge.device_id);
  if (to_edge.device_id != from_edge.device_id) rec.hops.push_back(to_edge.device_id);
  rec.hops.push_back(receiver->device_id);
  for (const auto& s : msg.supporter_sigs) rec.supporters.push_back(registry.find_by_key(s.supporter)->device_id);
  msg.set_status(Status::accepted);
  rec.status = Status::accepted;
  rec.tick = tick;
  return rec;
}

// One row of the message log.
struct MessageLogRow {
  Digest msg_id{};
  DeviceId sender;
  DeviceId receiver;
  std::uint32_t p = 0;
  Status status = Status::processing;
  std::string intercepted_by;  // empty unless status is -1
  bool is_illegal = false;
  std::uint64_t tick = 0;
  std::uint64_t height = 0;  // block height at which the message became terminal

  static void write_csv(std::ostream& os, std::span<const MessageLogRow> rows) {
    os << "msg_id,sender,receiver,p,status,intercepted_by,is_illegal,tick,height\n";
    for (const auto& r : rows) {
      os << to_hex(r.msg_id) << ',' << r.sender << ',' << r.receiver << ',' << r.p << ','
         << static_cast<int>(r.status) << ',' << r.intercepted_by << ',' << (r.is_illegal ? 1 : 0) << ','
         << r.tick << ',' << r.height << '\n';
    }
  }
};

}  // namespace edgechain::messaging
