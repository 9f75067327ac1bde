#pragma once

#include <algorithm>

#include "edgechain/error.hpp"
#include "edgechain/uint256.hpp"

namespace edgechain::consensus {

struct PuzzleParams {
  U256 target = pow2(248);
  U256 target_at_difficulty_1 = pow2(248);
  std::uint64_t expected_time = 64;
  std::uint64_t max_nonce = std::uint64_t{1} << 32;

  void validate() const {
    if (target == 0 || target > target_at_difficulty_1) {
      throw Error(Errc::invalid_config, "puzzle.target must satisfy 0 < target <= target_at_difficulty_1");
    }
    if (expected_time == 0) throw Error(Errc::invalid_config, "puzzle.expected_time must be > 0");
    if (max_nonce == 0) throw Error(Errc::invalid_config, "puzzle.max_nonce must be > 0");
  }

  bool operator==(const PuzzleParams&) const = default;
};

// D = target_1 / target.
inline long double difficulty(const PuzzleParams& p) {
  if (p.target == 0) throw Error(Errc::zero_target, "difficulty of a zero target");
  return p.target_at_difficulty_1.convert_to<long double>() / p.target.convert_to<long double>();
}

// target' = target * actual / expected, then clamped to a 4x swing around
// the old target and to [1, target_1].
inline PuzzleParams retarget(const PuzzleParams& p, std::uint64_t actual_time) {
  if (actual_time == 0) throw Error(Errc::nonpositive_time, "actual_time must be > 0");
  if (p.expected_time == 0) throw Error(Errc::nonpositive_time, "expected_time must be > 0");
  const U512 old_target(p.target);
  U512 next = old_target * actual_time / p.expected_time;
  next = std::clamp(next, old_target / 4, old_target * 4);
  next = std::clamp(next, U512(1), U512(p.target_at_difficulty_1));
  PuzzleParams out = p;
  out.target = next.convert_to<U256>();
  return out;
}

}  // namespace edgechain::consensus
