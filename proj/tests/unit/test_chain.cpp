#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace edgechain;
using namespace edgechain::ledger;
using edgechain::testing::build_chain;
using edgechain::testing::delivery_txs;
using edgechain::testing::seal_on;

TEST(Block, HeaderLayout) {
  BlockHeader h;
  EXPECT_EQ(h.encode().size(), 116u);
  EXPECT_EQ(h.encode_without_nonce().size(), 108u);
  // Nonce does not enter the inner hash.
  auto other = h;
  other.nonce = 99;
  EXPECT_EQ(h.inner_hash(), other.inner_hash());
  EXPECT_NE(h.hash(), other.hash());

  const auto bytes = h.encode();
  ByteReader r(bytes);
  EXPECT_EQ(BlockHeader::decode(r), h);
}

// Computed independently from the documented byte layout.
TEST(Block, GenesisIsFixed) {
  const auto& g = genesis_block();
  EXPECT_EQ(g.header.prev_hash, Digest{});
  EXPECT_TRUE(g.transactions.empty());
  EXPECT_EQ(g.header.target, u256_max());
  EXPECT_EQ(to_hex(g.header.hash()), "2fcb7cbdb38defee99180c94917f7b765c466cca70ac1d72fb2e4e1fa5a531a0");
}

TEST(Block, AssembleComputesMerkleRoot) {
  auto txs = delivery_txs(4, 10, "x");
  std::vector<Digest> leaves;
  for (const auto& t : txs) leaves.push_back(t.hash());
  auto b = assemble_block(txs, genesis_block().header, pow2(248), 64);
  EXPECT_EQ(b.header.merkle_root, MerkleTree::build(leaves).root());
  EXPECT_EQ(b.header.prev_hash, genesis_block().header.hash());

  auto empty = assemble_block({}, genesis_block().header, pow2(248), 64);
  EXPECT_EQ(empty.header.merkle_root, Digest{});

  std::swap(txs[0].timestamp, txs[3].timestamp);
  EXPECT_THROW(assemble_block(txs, genesis_block().header, pow2(248), 64), Error);
}

TEST(Chain, SealedBlockValidates) {
  Chain chain{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(1, "seal");
  auto block = seal_on(chain, chain.tip(), delivery_txs(3, 5, "a"), 64, rng);
  EXPECT_TRUE(validate_block(block, chain));
  chain.append_block(block);
  EXPECT_EQ(chain.height(), 1u);
  EXPECT_EQ(chain.tip(), block.header.hash());
  EXPECT_EQ(chain.check_block(block), BlockVerdict::duplicate);
}

TEST(Chain, RejectsBadBlocks) {
  Chain chain{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(2, "seal");
  auto good = seal_on(chain, chain.tip(), delivery_txs(3, 5, "a"), 64, rng);

  auto altered = good;
  altered.transactions[1].payload[0] ^= 0x01;
  EXPECT_EQ(chain.check_block(altered), BlockVerdict::merkle_mismatch);

  auto orphan = good;
  orphan.header.prev_hash[0] ^= 0x01;
  EXPECT_EQ(chain.check_block(orphan), BlockVerdict::unknown_parent);

  auto stale = assemble_block(delivery_txs(1, 0, "s"), genesis_block().header, pow2(248), 0);
  stale.header = consensus::solve_puzzle(stale.header, chain.params(), rng).header;
  EXPECT_EQ(chain.check_block(stale), BlockVerdict::stale_timestamp);

  auto easy = assemble_block(delivery_txs(1, 0, "e"), genesis_block().header, pow2(250), 64);
  easy.header = consensus::solve_puzzle(easy.header, chain.params(), rng).header;
  EXPECT_EQ(chain.check_block(easy), BlockVerdict::wrong_target);

  auto unsealed = good;
  while (consensus::verify_solution(unsealed.header)) ++unsealed.header.nonce;
  EXPECT_EQ(chain.check_block(unsealed), BlockVerdict::insufficient_work);

  EXPECT_THROW(chain.append_block(altered), Error);
  EXPECT_EQ(chain.height(), 0u);
}

TEST(Chain, RetargetScheduleEnforced) {
  Chain chain{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(3, "seal");
  chain.append_block(seal_on(chain, chain.tip(), {}, 64, rng));
  chain.append_block(seal_on(chain, chain.tip(), {}, 96, rng));  // half the expected interval
  EXPECT_EQ(chain.expected_target(chain.tip()), pow2(247));
  auto next = seal_on(chain, chain.tip(), {}, 160, rng);
  EXPECT_EQ(next.header.target, pow2(247));
  chain.append_block(next);
  EXPECT_EQ(chain.height(), 3u);
}

TEST(ForkChoice, TieGoesToLowerHashThenLongerBranchWins) {
  Chain chain{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(4, "fork");
  auto a = seal_on(chain, chain.tip(), delivery_txs(1, 1, "A"), 64, rng);
  auto b = seal_on(chain, chain.tip(), delivery_txs(1, 1, "B"), 64, rng);
  chain.append_block(a);
  chain.append_block(b);
  const auto lower = std::min(a.header.hash(), b.header.hash());
  const auto higher = std::max(a.header.hash(), b.header.hash());
  EXPECT_EQ(chain.tip(), lower);

  chain.append_block(seal_on(chain, higher, delivery_txs(1, 2, "C"), 128, rng));
  EXPECT_EQ(chain.height(), 2u);
  EXPECT_EQ(chain.canonical()[1]->header.hash(), higher);
}

TEST(ForkChoice, IndependentOfArrivalOrder) {
  Chain builder{consensus::PuzzleParams{}};
  auto rng = RngStream::derive(5, "fork");
  // Two branches from genesis (lengths 3 and 2) plus a sibling at height 1.
  std::vector<Block> blocks;
  auto add = [&](const Digest& parent, std::string tag, std::uint64_t ts) {
    auto b = seal_on(builder, parent, delivery_txs(1, ts, tag), ts, rng);
    builder.append_block(b);
    blocks.push_back(b);
    return b.header.hash();
  };
  auto a1 = add(builder.genesis_hash(), "a1", 64);
  auto a2 = add(a1, "a2", 128);
  add(a2, "a3", 192);
  auto b1 = add(builder.genesis_hash(), "b1", 64);
  add(b1, "b2", 128);
  add(builder.genesis_hash(), "c1", 64);

  // Replay in random parent-respecting orders.
  for (int trial = 0; trial < 30; ++trial) {
    auto pending = blocks;
    for (std::size_t i = pending.size(); i > 1; --i) std::swap(pending[i - 1], pending[rng.uniform_below(i)]);
    Chain replay{consensus::PuzzleParams{}};
    while (!pending.empty()) {
      auto it = std::find_if(pending.begin(), pending.end(),
                             [&](const Block& b) { return replay.find(b.header.prev_hash) != nullptr; });
      replay.append_block(*it);
      pending.erase(it);
    }
    EXPECT_EQ(replay.tip(), builder.tip());
    EXPECT_EQ(replay.height(), 3u);
  }
}

TEST(ChainProperty, TamperInvalidatesBlockAndDescendants) {
  auto chain = build_chain(12, 4);
  auto blocks = chain.canonical_blocks();
  blocks.erase(blocks.begin());  // genesis is implied
  ASSERT_TRUE(verify_block_sequence(blocks, chain.params()).valid);

  auto rng = RngStream::derive(6, "tamper");
  for (int trial = 0; trial < 20; ++trial) {
    auto copy = blocks;
    const auto h = rng.uniform_below(copy.size());
    auto& tx = copy[h].transactions[rng.uniform_below(copy[h].transactions.size())];
    tx.payload[rng.uniform_below(tx.payload.size())] ^= static_cast<std::uint8_t>(1u << rng.uniform_below(8));

    const auto& parent = h == 0 ? genesis_block().header : copy[h - 1].header;
    EXPECT_NE(check_block_against(copy[h], parent, copy[h].header.target), BlockVerdict::ok);
    auto verdict = verify_block_sequence(copy, chain.params());
    EXPECT_FALSE(verdict.valid);
    EXPECT_EQ(verdict.failed_height, h + 1);

    // Re-sealing the tampered block still breaks the child's prev_hash link.
    if (h + 1 < copy.size()) {
      copy[h].header.merkle_root = merkle_root_of(copy[h].transactions);
      copy[h].header = consensus::solve_puzzle(copy[h].header, chain.params(), rng).header;
      auto relinked = verify_block_sequence(copy, chain.params());
      EXPECT_FALSE(relinked.valid);
      EXPECT_EQ(relinked.failed_height, h + 2);
    }
  }
}

TEST(ChainFile, RoundTrip) {
  auto chain = build_chain(5, 3);
  const auto bytes = encode_chain(chain);
  auto ex = decode_chain(bytes);
  EXPECT_EQ(ex.blocks.size(), 5u);
  EXPECT_EQ(ex.params, chain.params());
  auto imported = import_chain(ex);
  EXPECT_EQ(imported.tip(), chain.tip());
  EXPECT_EQ(encode_chain(imported), bytes);

  auto loc = chain.locate_tx(chain.canonical()[3]->transactions[2].hash());
  ASSERT_TRUE(loc);
  EXPECT_EQ(loc->height, 3u);
  EXPECT_EQ(loc->index, 2u);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_chain(truncated), Error);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_chain(bad_magic), Error);
}
