#pragma once

#include <span>
#include <vector>

#include "edgechain/bytes.hpp"
#include "edgechain/crypto.hpp"
#include "edgechain/ledger/merkle.hpp"
#include "edgechain/uint256.hpp"

namespace edgechain::ledger {

enum class TxKind : std::uint8_t { delivery = 1, reward = 2, registration = 3 };

struct Transaction {
  TxKind kind = TxKind::delivery;
  Bytes payload;
  std::uint64_t timestamp = 0;  // logical tick

  Digest hash() const { return crypto::sha256(payload); }
  bool operator==(const Transaction&) const = default;
};

// Canonical header layout (big-endian, 116 bytes):
//   version u32 | prev_hash 32 | merkle_root 32 | nonce u64 | target 32 | timestamp u64
// The puzzle hash drops the nonce from that layout (108 bytes), hashes it,
// and then hashes nonce || inner.
struct BlockHeader {
  std::uint32_t version = 1;
  Digest prev_hash{};
  Digest merkle_root{};
  std::uint64_t nonce = 0;
  U256 target = 0;
  std::uint64_t timestamp = 0;

  Bytes encode() const {
    ByteWriter w;
    w.u32(version).raw(prev_hash).raw(merkle_root).u64(nonce).raw(to_digest(target)).u64(timestamp);
    return std::move(w).take();
  }

  Bytes encode_without_nonce() const {
    ByteWriter w;
    w.u32(version).raw(prev_hash).raw(merkle_root).raw(to_digest(target)).u64(timestamp);
    return std::move(w).take();
  }

  static BlockHeader decode(ByteReader& r) {
    BlockHeader h;
    h.version = r.u32();
    h.prev_hash = r.fixed<32>();
    h.merkle_root = r.fixed<32>();
    h.nonce = r.u64();
    h.target = from_digest(r.fixed<32>());
    h.timestamp = r.u64();
    return h;
  }

  Digest inner_hash() const { return crypto::sha256(encode_without_nonce()); }

  // Block id; also the value the puzzle compares against the target.
  Digest hash() const { return puzzle_hash(nonce, inner_hash()); }

  static Digest puzzle_hash(std::uint64_t nonce, const Digest& inner) {
    std::array<std::uint8_t, 40> buf{};
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(nonce >> (56 - 8 * i));
    std::copy(inner.begin(), inner.end(), buf.begin() + 8);
    return crypto::sha256(buf);
  }

  bool operator==(const BlockHeader&) const = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;

  bool operator==(const Block&) const = default;
};

// All-zero digest for an empty body.
inline Digest merkle_root_of(std::span<const Transaction> txs) {
  if (txs.empty()) return Digest{};
  std::vector<Digest> leaves;
  leaves.reserve(txs.size());
  for (const auto& tx : txs) leaves.push_back(tx.hash());
  return MerkleTree::build(leaves).root();
}

inline bool timestamps_sorted(std::span<const Transaction> txs) {
  for (std::size_t i = 1; i < txs.size(); ++i) {
    if (txs[i].timestamp < txs[i - 1].timestamp) return false;
  }
  return true;
}

// Unsealed block on top of prev (nonce 0 until the puzzle is solved).
inline Block assemble_block(std::vector<Transaction> txs, const BlockHeader& prev, const U256& target, std::uint64_t tick) {
  if (!timestamps_sorted(txs)) throw Error(Errc::unsorted_transactions, "transactions must be in tick order");
  Block b;
  b.header.prev_hash = prev.hash();
  b.header.merkle_root = merkle_root_of(txs);
  b.header.target = target;
  b.header.timestamp = tick;
  b.transactions = std::move(txs);
  return b;
}

// Fixed genesis: zero prev_hash, empty body, maximum target, tick 0.
inline const Block& genesis_block() {
  static const Block g = [] {
    Block b;
    b.header.target = u256_max();
    return b;
  }();
  return g;
}

inline void encode_block(ByteWriter& w, const Block& b) {
  w.raw(b.header.encode());
  w.u32(static_cast<std::uint32_t>(b.transactions.size()));
  for (const auto& tx : b.transactions) {
    w.u8(static_cast<std::uint8_t>(tx.kind)).u64(tx.timestamp).field(tx.payload);
  }
}

inline Block decode_block(ByteReader& r) {
  Block b;
  b.header = BlockHeader::decode(r);
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    Transaction tx;
    auto kind = r.u8();
    if (kind < 1 || kind > 3) throw Error(Errc::malformed, "transaction kind " + std::to_string(kind));
    tx.kind = static_cast<TxKind>(kind);
    tx.timestamp = r.u64();
    tx.payload = r.field();
    b.transactions.push_back(std::move(tx));
  }
  return b;
}

}  // namespace edgechain::ledger
