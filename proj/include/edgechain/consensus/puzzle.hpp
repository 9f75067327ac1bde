#pragma once

#include <cmath>

#include "edgechain/consensus/difficulty.hpp"
#include "edgechain/ledger/block.hpp"
#include "edgechain/rng.hpp"

namespace edgechain::consensus {

struct SealResult {
  ledger::BlockHeader header;
  std::uint64_t attempts = 0;
};

// True iff H(nonce || H(header without nonce)) <= header.target.
inline bool verify_solution(const ledger::BlockHeader& header) {
  return from_digest(header.hash()) <= header.target;
}

inline bool verify_solution(const ledger::BlockHeader& header, const PuzzleParams& /*params*/) {
  return verify_solution(header);
}

// Tries nonces start, start+1, ... (start drawn from rng) against the
// header's own target, for at most params.max_nonce attempts.
inline SealResult solve_puzzle(ledger::BlockHeader header, const PuzzleParams& params, RngStream& rng) {
  const Digest inner = header.inner_hash();
  const Digest bound = to_digest(header.target);
  const std::uint64_t start = rng.next_u64();
  for (std::uint64_t i = 0; i < params.max_nonce; ++i) {
    const std::uint64_t nonce = start + i;
    if (ledger::BlockHeader::puzzle_hash(nonce, inner) <= bound) {
      header.nonce = nonce;
      return {header, i + 1};
    }
  }
  throw Error(Errc::nonce_exhausted, std::to_string(params.max_nonce) + " attempts");
}

// Probability that one attempt meets `target`: (target + 1) / 2^256.
inline long double success_probability(const U256& target) {
  return (target.convert_to<long double>() + 1.0L) / std::ldexp(1.0L, 256);
}

}  // namespace edgechain::consensus
