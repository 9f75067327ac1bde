#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edgechain/consensus/difficulty.hpp"
#include "edgechain/ledger/block.hpp"

namespace edgechain::ledger {

enum class BlockVerdict {
  ok,
  unknown_parent,
  duplicate,
  merkle_mismatch,
  unsorted_transactions,
  stale_timestamp,
  wrong_target,
  insufficient_work,
  bad_version,
};

constexpr std::string_view verdict_name(BlockVerdict v) noexcept {
  switch (v) {
    case BlockVerdict::ok: return "ok";
    case BlockVerdict::unknown_parent: return "unknown prev_hash";
    case BlockVerdict::duplicate: return "duplicate block";
    case BlockVerdict::merkle_mismatch: return "merkle_root does not match transactions";
    case BlockVerdict::unsorted_transactions: return "transactions out of tick order";
    case BlockVerdict::stale_timestamp: return "timestamp not after parent";
    case BlockVerdict::wrong_target: return "target does not follow the retarget schedule";
    case BlockVerdict::insufficient_work: return "header hash above target";
    case BlockVerdict::bad_version: return "unsupported version";
  }
  return "unknown";
}

struct TxLocation {
  Digest block_hash{};
  std::uint64_t height = 0;
  std::size_t index = 0;
};

// Schedule target for the child of `parent`, given the grandparent's
// timestamp (absent when the parent is genesis).
inline U256 scheduled_target(const consensus::PuzzleParams& params, const BlockHeader& parent,
                             std::optional<std::uint64_t> grandparent_timestamp) {
  if (!grandparent_timestamp) return params.target;
  consensus::PuzzleParams current = params;
  current.target = parent.target;
  return consensus::retarget(current, parent.timestamp - *grandparent_timestamp).target;
}

// Checks that need only the block and its parent context.
inline BlockVerdict check_block_against(const Block& block, const BlockHeader& parent, const U256& expected_target) {
  const auto& h = block.header;
  if (h.version != 1) return BlockVerdict::bad_version;
  if (h.prev_hash != parent.hash()) return BlockVerdict::unknown_parent;
  if (h.timestamp <= parent.timestamp) return BlockVerdict::stale_timestamp;
  if (!timestamps_sorted(block.transactions)) return BlockVerdict::unsorted_transactions;
  if (h.merkle_root != merkle_root_of(block.transactions)) return BlockVerdict::merkle_mismatch;
  if (h.target != expected_target) return BlockVerdict::wrong_target;
  if (from_digest(h.hash()) > h.target) return BlockVerdict::insufficient_work;
  return BlockVerdict::ok;
}

// Block store with longest-valid-path fork choice. The canonical tip is the
// highest block; equal heights resolve to the lower header hash, so the
// result depends only on which blocks are stored, not on arrival order.
class Chain {
 public:
  explicit Chain(consensus::PuzzleParams params) : params_(params) {
    const auto& g = genesis_block();
    genesis_hash_ = g.header.hash();
    nodes_.emplace(genesis_hash_, Node{g, 0});
    tip_ = genesis_hash_;
  }

  const consensus::PuzzleParams& params() const noexcept { return params_; }
  const Digest& genesis_hash() const noexcept { return genesis_hash_; }
  const Digest& tip() const noexcept { return tip_; }
  const BlockHeader& tip_header() const { return nodes_.at(tip_).block.header; }
  std::uint64_t height() const { return nodes_.at(tip_).height; }
  std::size_t block_count() const noexcept { return nodes_.size(); }

  const Block* find(const Digest& hash) const {
    auto it = nodes_.find(hash);
    return it == nodes_.end() ? nullptr : &it->second.block;
  }

  std::optional<std::uint64_t> height_of(const Digest& hash) const {
    auto it = nodes_.find(hash);
    if (it == nodes_.end()) return std::nullopt;
    return it->second.height;
  }

  // Target the next block on top of `parent` must carry.
  U256 expected_target(const Digest& parent_hash) const {
    const auto& parent = nodes_.at(parent_hash);
    if (parent.height == 0) return scheduled_target(params_, parent.block.header, std::nullopt);
    const auto& grand = nodes_.at(parent.block.header.prev_hash);
    return scheduled_target(params_, parent.block.header, grand.block.header.timestamp);
  }

  BlockVerdict check_block(const Block& block) const {
    auto parent = nodes_.find(block.header.prev_hash);
    if (parent == nodes_.end()) return BlockVerdict::unknown_parent;
    if (nodes_.contains(block.header.hash())) return BlockVerdict::duplicate;
    return check_block_against(block, parent->second.block.header, expected_target(parent->first));
  }

  bool validate_block(const Block& block) const { return check_block(block) == BlockVerdict::ok; }

  void append_block(Block block) {
    if (auto v = check_block(block); v != BlockVerdict::ok) {
      throw Error(Errc::invalid_block, std::string(verdict_name(v)));
    }
    const auto hash = block.header.hash();
    const auto height = nodes_.at(block.header.prev_hash).height + 1;
    nodes_.emplace(hash, Node{std::move(block), height});
    const auto tip_height = nodes_.at(tip_).height;
    if (height > tip_height || (height == tip_height && hash < tip_)) tip_ = hash;
  }

  // Canonical path, genesis first.
  std::vector<const Block*> canonical() const {
    std::vector<const Block*> path;
    Digest cursor = tip_;
    while (true) {
      const auto& node = nodes_.at(cursor);
      path.push_back(&node.block);
      if (node.height == 0) break;
      cursor = node.block.header.prev_hash;
    }
    return {path.rbegin(), path.rend()};
  }

  std::vector<Block> canonical_blocks() const {
    std::vector<Block> out;
    for (const auto* b : canonical()) out.push_back(*b);
    return out;
  }

  std::optional<TxLocation> locate_tx(const Digest& tx_hash) const {
    auto path = canonical();
    for (std::size_t h = 0; h < path.size(); ++h) {
      const auto& txs = path[h]->transactions;
      for (std::size_t i = 0; i < txs.size(); ++i) {
        if (txs[i].hash() == tx_hash) return TxLocation{path[h]->header.hash(), h, i};
      }
    }
    return std::nullopt;
  }

 private:
  struct Node {
    Block block;
    std::uint64_t height;
  };

  consensus::PuzzleParams params_;
  Digest genesis_hash_{};
  Digest tip_{};
  std::map<Digest, Node> nodes_;
};

inline bool validate_block(const Block& block, const Chain& chain) { return chain.validate_block(block); }

struct SequenceVerdict {
  bool valid = true;
  std::uint64_t failed_height = 0;
  BlockVerdict reason = BlockVerdict::ok;
};

// Re-validates a linear chain (heights 1..n, genesis implied) from scratch.
inline SequenceVerdict verify_block_sequence(std::span<const Block> blocks, const consensus::PuzzleParams& params) {
  const BlockHeader* parent = &genesis_block().header;
  std::optional<std::uint64_t> grand_ts;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto target = scheduled_target(params, *parent, grand_ts);
    if (auto v = check_block_against(blocks[i], *parent, target); v != BlockVerdict::ok) {
      return {false, i + 1, v};
    }
    grand_ts = parent->timestamp;
    parent = &blocks[i].header;
  }
  return {};
}

// Chain file layout (big-endian):
//   magic "ECHN" | format u32 = 1
//   target_at_difficulty_1 32 | initial target 32 | expected_time u64 | max_nonce u64
//   block count u32 | blocks (heights 1..n)
// block = header (116 bytes) | tx count u32 | per tx: kind u8 | timestamp u64 | payload len u32 | payload
struct ChainExport {
  consensus::PuzzleParams params;
  std::vector<Block> blocks;
};

inline Bytes encode_chain(const ChainExport& ex) {
  ByteWriter w;
  w.raw(to_bytes("ECHN")).u32(1);
  w.raw(to_digest(ex.params.target_at_difficulty_1)).raw(to_digest(ex.params.target));
  w.u64(ex.params.expected_time).u64(ex.params.max_nonce);
  w.u32(static_cast<std::uint32_t>(ex.blocks.size()));
  for (const auto& b : ex.blocks) encode_block(w, b);
  return std::move(w).take();
}

inline Bytes encode_chain(const Chain& chain) {
  ChainExport ex{chain.params(), {}};
  auto path = chain.canonical();
  for (std::size_t h = 1; h < path.size(); ++h) ex.blocks.push_back(*path[h]);
  return encode_chain(ex);
}

inline ChainExport decode_chain(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(4);
  if (std::string(magic.begin(), magic.end()) != "ECHN") throw Error(Errc::malformed, "not a chain file");
  if (auto fmt = r.u32(); fmt != 1) throw Error(Errc::malformed, "chain format " + std::to_string(fmt));
  ChainExport ex;
  ex.params.target_at_difficulty_1 = from_digest(r.fixed<32>());
  ex.params.target = from_digest(r.fixed<32>());
  ex.params.expected_time = r.u64();
  ex.params.max_nonce = r.u64();
  for (auto n = r.u32(); n > 0; --n) ex.blocks.push_back(decode_block(r));
  if (!r.done()) throw Error(Errc::malformed, "trailing bytes after chain");
  return ex;
}

inline Chain import_chain(const ChainExport& ex) {
  Chain chain(ex.params);
  for (const auto& b : ex.blocks) chain.append_block(b);
  return chain;
}

}  // namespace edgechain::ledger
