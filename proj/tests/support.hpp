#pragma once

#include <string>
#include <vector>

#include "edgechain/edgechain.hpp"

namespace edgechain::testing {

inline Digest digest_hex(std::string_view hex) { return array_from_hex<32>(hex); }

inline std::vector<ledger::Transaction> delivery_txs(std::size_t n, std::uint64_t first_tick, std::string_view tag) {
  std::vector<ledger::Transaction> txs;
  for (std::size_t i = 0; i < n; ++i) {
    txs.push_back({ledger::TxKind::delivery, to_bytes(std::string(tag) + "/" + std::to_string(i)), first_tick + i});
  }
  return txs;
}

// Assembles and seals a block on top of `parent` in `chain`, at the
// scheduled target.
inline ledger::Block seal_on(const ledger::Chain& chain, const Digest& parent, std::vector<ledger::Transaction> txs,
                             std::uint64_t timestamp, RngStream& rng) {
  const auto& prev = chain.find(parent)->header;
  auto block = ledger::assemble_block(std::move(txs), prev, chain.expected_target(parent), timestamp);
  block.header = consensus::solve_puzzle(block.header, chain.params(), rng).header;
  return block;
}

// Linear chain of `blocks` blocks, `txs_per_block` deliveries each, spaced
// exactly expected_time apart so the target never moves.
inline ledger::Chain build_chain(std::size_t blocks, std::size_t txs_per_block, std::uint64_t seed = 7) {
  ledger::Chain chain{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(seed, "test-chain");
  for (std::size_t h = 1; h <= blocks; ++h) {
    const auto ts = h * chain.params().expected_time;
    auto txs = delivery_txs(txs_per_block, ts, "block" + std::to_string(h));
    chain.append_block(seal_on(chain, chain.tip(), std::move(txs), ts, rng));
  }
  return chain;
}

// Small registry: `communities` communities with one edge node each and
// `per_community` infrastructures per community.
struct MiniNet {
  identity::Registry registry{11};
  trust::TrustLedger trust;
  std::vector<identity::CredentialBundle> edges;
  std::vector<identity::CredentialBundle> infras;

  MiniNet(std::uint32_t communities, std::uint32_t per_community) {
    for (CommunityId c = 0; c < communities; ++c) {
      registry.add_community(c);
      edges.push_back(simnet::enroll(registry, trust, "edge-" + std::to_string(c), Role::edge_node, c,
                                     identity::kAuthorityId));
    }
    for (CommunityId c = 0; c < communities; ++c) {
      for (std::uint32_t i = 0; i < per_community; ++i) {
        infras.push_back(simnet::enroll(registry, trust, "sensor-" + std::to_string(c) + "-" + std::to_string(i),
                                        Role::infrastructure, c, edges[c].device_id));
      }
    }
  }

  // Every infrastructure except the sender, credit from the ledger, tier 0.
  std::vector<messaging::SupporterCandidate> candidates() const {
    std::vector<messaging::SupporterCandidate> out;
    for (const auto& b : infras) out.push_back({&b, trust.credit(b.device_id), 0});
    return out;
  }
};

}  // namespace edgechain::testing
