#pragma once

#include <span>
#include <vector>

#include "edgechain/crypto.hpp"

namespace edgechain::ledger {

enum class Side : std::uint8_t { left = 0, right = 1 };

struct ProofStep {
  Digest sibling{};
  Side side = Side::right;  // where the sibling sits relative to the running hash
};

struct MerkleProof {
  std::size_t leaf_index = 0;
  std::vector<ProofStep> siblings;
};

// Bitcoin-style tree: interior node = H(left || right); an odd node at the
// end of a layer is paired with itself. A single leaf is its own root.
class MerkleTree {
 public:
  static MerkleTree build(std::span<const Digest> leaves) {
    if (leaves.empty()) throw Error(Errc::empty_leaves, "merkle tree needs at least one leaf");
    MerkleTree t;
    t.levels_.emplace_back(leaves.begin(), leaves.end());
    while (t.levels_.back().size() > 1) {
      const auto& below = t.levels_.back();
      std::vector<Digest> above;
      above.reserve((below.size() + 1) / 2);
      for (std::size_t i = 0; i < below.size(); i += 2) {
        const Digest& right = i + 1 < below.size() ? below[i + 1] : below[i];
        above.push_back(crypto::sha256_pair(below[i], right));
      }
      t.levels_.push_back(std::move(above));
    }
    return t;
  }

  const Digest& root() const { return levels_.back().front(); }
  const std::vector<Digest>& leaves() const { return levels_.front(); }
  const std::vector<std::vector<Digest>>& levels() const { return levels_; }
  std::size_t leaf_count() const { return levels_.front().size(); }
  std::size_t height() const { return levels_.size() - 1; }

  MerkleProof proof(std::size_t leaf_index) const {
    if (leaf_index >= leaf_count()) {
      throw Error(Errc::index_out_of_range, std::to_string(leaf_index) + " >= " + std::to_string(leaf_count()));
    }
    MerkleProof p;
    p.leaf_index = leaf_index;
    std::size_t idx = leaf_index;
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
      const auto& layer = levels_[level];
      if (idx % 2 == 0) {
        p.siblings.push_back({idx + 1 < layer.size() ? layer[idx + 1] : layer[idx], Side::right});
      } else {
        p.siblings.push_back({layer[idx - 1], Side::left});
      }
      idx /= 2;
    }
    return p;
  }

 private:
  MerkleTree() = default;
  std::vector<std::vector<Digest>> levels_;
};

inline MerkleProof merkle_proof(const MerkleTree& tree, std::size_t leaf_index) { return tree.proof(leaf_index); }

// Light-node check: fold the leaf through the siblings and compare roots.
inline bool verify_merkle_proof(const Digest& leaf_hash, const MerkleProof& proof, const Digest& root) {
  Digest acc = leaf_hash;
  for (const auto& step : proof.siblings) {
    acc = step.side == Side::right ? crypto::sha256_pair(acc, step.sibling) : crypto::sha256_pair(step.sibling, acc);
  }
  return acc == root;
}

}  // namespace edgechain::ledger
