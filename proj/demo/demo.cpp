// Small end-to-end walk: simulate, check the chain, prove one delivery.
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "edgechain/edgechain.hpp"

using namespace edgechain;

int main(int argc, char** argv) {
  simnet::SimConfig cfg;
  cfg.n_messages = 2000;
  cfg.supporters = 8;
  cfg.attack_rate = 0.2;
  if (argc > 1) cfg.seed = std::strtoull(argv[1], nullptr, 10);

  auto r = simnet::run_simulation(cfg);
  const auto& m = r.metrics;
  std::printf("messages      %llu (illegal %llu)\n", static_cast<unsigned long long>(cfg.n_messages), static_cast<unsigned long long>(m.illegal_sent));
  std::printf("intercepted   %llu -> rate %.4f (1-(1-d)^p = %.4f)\n",
              static_cast<unsigned long long>(m.illegal_intercepted), m.interception_rate,
              1 - std::pow(1 - cfg.attack_rate, cfg.supporters));
  std::printf("baseline      %.4f\n", simnet::baseline_detection_prob(cfg.supporters, cfg.attack_rate));
  std::printf("chain height  %llu, tip %s\n", static_cast<unsigned long long>(r.chain.height()),
              to_hex(r.chain.tip()).substr(0, 16).c_str());

  auto blocks = r.chain.canonical_blocks();
  blocks.erase(blocks.begin());  // genesis
  auto v = ledger::verify_block_sequence(blocks, r.chain.params());
  std::printf("chain check   %s\n", v.valid ? "valid" : "INVALID");

  // first delivery record on the canonical chain
  unsigned long long height = 0;
  for (const auto* block : r.chain.canonical()) {
    for (std::size_t i = 0; i < block->transactions.size(); ++i) {
      if (block->transactions[i].kind != ledger::TxKind::delivery) continue;
      std::vector<Digest> leaves;
      for (const auto& tx : block->transactions) leaves.push_back(tx.hash());
      auto tree = ledger::MerkleTree::build(leaves);
      auto proof = tree.proof(i);
      bool ok = ledger::verify_merkle_proof(leaves[i], proof, block->header.merkle_root);
      std::printf("proof         tx %s at height %llu, %zu siblings, %s\n", to_hex(leaves[i]).substr(0, 16).c_str(),
                  height, proof.siblings.size(),
                  ok ? "verified" : "FAILED");
      return ok && v.valid ? 0 : 1;
    }
    ++height;
  }
  return v.valid ? 0 : 1;
}
