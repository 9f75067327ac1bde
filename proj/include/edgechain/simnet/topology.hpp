#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "edgechain/identity.hpp"
#include "edgechain/simnet/config.hpp"
#include "edgechain/trust.hpp"

namespace edgechain::simnet {

struct Community {
  CommunityId id = 0;
  DeviceId edge_node;
  std::vector<DeviceId> members;  // infrastructures, in registration order
};

// IoT layer plus its abstraction: communities, each managed by one edge node,
// with intra-community links between infrastructures.
struct Network {
  identity::Registry registry;
  trust::TrustLedger trust;
  std::map<DeviceId, identity::CredentialBundle> credentials;
  std::vector<Community> communities;
  std::vector<DeviceId> infrastructures;
  std::vector<DeviceId> edge_nodes;
  std::set<std::pair<DeviceId, DeviceId>> links;  // (a, b) with a < b
  std::map<DeviceId, std::uint64_t> hash_rate;     // edge nodes only
  std::map<DeviceId, CommunityId> community_of;

  bool linked(const DeviceId& a, const DeviceId& b) const {
    return a < b ? links.contains({a, b}) : links.contains({b, a});
  }
  const identity::CredentialBundle& bundle(const DeviceId& id) const { return credentials.at(id); }
};

inline std::string device_name(std::string_view prefix, std::uint64_t index, std::uint64_t count, int min_width) {
  int width = 1;
  for (auto n = count > 0 ? count - 1 : 0; n >= 10; n /= 10) ++width;
  width = std::max(width, min_width);
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return std::string(prefix) + digits;
}

inline DeviceId infrastructure_name(std::uint64_t i, std::uint64_t n) { return device_name("infra-", i, n, 3); }
inline DeviceId edge_node_name(std::uint64_t i, std::uint64_t n) { return device_name("edge-", i, n, 2); }

// Registers a participant and initializes its trust record in one step.
inline identity::CredentialBundle enroll(identity::Registry& registry, trust::TrustLedger& ledger, const DeviceId& id,
                                         Role role, CommunityId community, std::string_view issuer,
                                         trust::TrustRecord initial = {}, std::uint32_t quality_prior = 0) {
  auto bundle = registry.register_device(id, role, community, issuer);
  ledger.init(id, role, initial, quality_prior);
  return bundle;
}

inline Network generate_topology(const SimConfig& cfg) {
  cfg.validate();
  Network net{identity::Registry(cfg.seed), trust::TrustLedger(cfg.trust), {}, {}, {}, {}, {}, {}, {}};
  auto rng = RngStream::derive(cfg.seed, "topology");
  auto initial_trust = [&] {
    const auto u = static_cast<std::uint64_t>(rng.uniform_int(cfg.trust_init_min, cfg.trust_init_max));
    return trust::seeded_record(u, cfg.trust_init_max);
  };

  for (CommunityId c = 0; c < cfg.n_communities; ++c) {
    net.registry.add_community(c);
    const auto id = edge_node_name(c, cfg.n_edge_nodes);
    auto init = initial_trust();
    net.credentials.emplace(id, enroll(net.registry, net.trust, id, Role::edge_node, c, identity::kAuthorityId, init, cfg.quality_prior));
    net.hash_rate[id] = static_cast<std::uint64_t>(
        rng.uniform_int(static_cast<std::int64_t>(cfg.puzzle.hash_rate_min), static_cast<std::int64_t>(cfg.puzzle.hash_rate_max)));
    net.communities.push_back({c, id, {}});
    net.edge_nodes.push_back(id);
    net.community_of[id] = c;
  }

  for (std::uint32_t i = 0; i < cfg.n_infrastructures; ++i) {
    const auto c = static_cast<CommunityId>(rng.uniform_below(cfg.n_communities));
    const auto id = infrastructure_name(i, cfg.n_infrastructures);
    auto init = initial_trust();
    net.credentials.emplace(
        id, enroll(net.registry, net.trust, id, Role::infrastructure, c, net.communities[c].edge_node, init,
                   cfg.quality_prior));
    net.communities[c].members.push_back(id);
    net.infrastructures.push_back(id);
    net.community_of[id] = c;
  }

  for (const auto& community : net.communities) {
    const auto& m = community.members;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        if (rng.bernoulli(cfg.connection_rate)) net.links.insert(m[a] < m[b] ? std::pair{m[a], m[b]} : std::pair{m[b], m[a]});
      }
    }
  }
  return net;
}

}  // namespace edgechain::simnet
