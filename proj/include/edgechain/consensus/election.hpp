#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "edgechain/consensus/puzzle.hpp"
#include "edgechain/types.hpp"

namespace edgechain::consensus {

struct Election {
  std::vector<DeviceId> voters;
  std::map<DeviceId, DeviceId> ballots;  // voter -> candidate
  std::map<DeviceId, double> weights;    // voter -> edge-node credit
};

struct Tally {
  DeviceId candidate;
  double votes = 0.0;
};

// Candidates ordered by weighted votes, ties to the lower device id.
inline std::vector<Tally> tally(const Election& e) {
  std::map<DeviceId, double> sums;
  for (const auto& [voter, candidate] : e.ballots) {
    auto w = e.weights.find(voter);
    sums[candidate] += w == e.weights.end() ? 0.0 : w->second;
  }
  std::vector<Tally> out;
  for (auto& [c, v] : sums) out.push_back({c, v});
  std::stable_sort(out.begin(), out.end(), [](const Tally& a, const Tally& b) { return a.votes > b.votes; });
  return out;
}

inline DeviceId elect_full_node(const Election& e) {
  if (e.ballots.empty()) throw Error(Errc::no_ballots, "election without ballots");
  return tally(e).front().candidate;
}

struct RaceEntrant {
  DeviceId id;
  std::uint64_t hash_rate = 1;  // attempts per tick
};

struct RaceOutcome {
  std::size_t winner = 0;          // index into the entrant list
  std::uint64_t attempts = 0;      // winner's attempts to solution
  std::uint64_t elapsed_ticks = 1; // ceil(attempts / hash_rate), at least 1
};

// Entrant i finishes at attempts_i / rate_i; the earliest wins, ties to the
// lower device id. Comparison is exact (cross-multiplied).
inline RaceOutcome decide_race(std::span<const RaceEntrant> entrants, std::span<const std::uint64_t> attempts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entrants.size(); ++i) {
    const auto lhs = static_cast<unsigned __int128>(attempts[i]) * entrants[best].hash_rate;
    const auto rhs = static_cast<unsigned __int128>(attempts[best]) * entrants[i].hash_rate;
    if (lhs < rhs || (lhs == rhs && entrants[i].id < entrants[best].id)) best = i;
  }
  const auto rate = std::max<std::uint64_t>(1, entrants[best].hash_rate);
  return {best, attempts[best], std::max<std::uint64_t>(1, (attempts[best] + rate - 1) / rate)};
}

// Fast mode: attempts-to-solution drawn from the geometric distribution,
// no hashing.
inline RaceOutcome race_fast(std::span<const RaceEntrant> entrants, const U256& target, RngStream& rng) {
  if (entrants.empty()) throw Error(Errc::no_ballots, "race without entrants");
  const long double p = success_probability(target);
  std::vector<std::uint64_t> attempts;
  for (std::size_t i = 0; i < entrants.size(); ++i) attempts.push_back(rng.geometric_trials(p));
  return decide_race(entrants, attempts);
}

// Real-hash mode: each entrant actually solves its own header.
inline RaceOutcome race_real(std::span<const RaceEntrant> entrants, std::span<const ledger::BlockHeader> headers,
                             const PuzzleParams& params, RngStream& rng) {
  if (entrants.empty()) throw Error(Errc::no_ballots, "race without entrants");
  std::vector<std::uint64_t> attempts;
  for (const auto& h : headers) {
    try {
      attempts.push_back(solve_puzzle(h, params, rng).attempts);
    } catch (const Error& e) {
      if (e.code() != Errc::nonce_exhausted) throw;
      attempts.push_back(std::numeric_limits<std::uint64_t>::max());
    }
  }
  return decide_race(entrants, attempts);
}

}  // namespace edgechain::consensus
