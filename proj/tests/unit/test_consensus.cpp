#include <gtest/gtest.h>

#include "support.hpp"

using namespace edgechain;
using namespace edgechain::consensus;

namespace {

PuzzleParams with_target(const U256& target, const U256& t1 = pow2(248)) {
  PuzzleParams p;
  p.target_at_difficulty_1 = t1;
  p.target = target;
  return p;
}

double mean_attempts(const U256& target, int seals, RngStream& rng) {
  auto params = with_target(target, u256_max());
  double sum = 0;
  for (int i = 0; i < seals; ++i) {
    ledger::BlockHeader h;
    h.target = target;
    h.timestamp = static_cast<std::uint64_t>(i);
    auto r = solve_puzzle(h, params, rng);
    EXPECT_TRUE(verify_solution(r.header));
    sum += static_cast<double>(r.attempts);
  }
  return sum / seals;
}

}  // namespace

TEST(Difficulty, Examples) {
  EXPECT_EQ(difficulty(with_target(pow2(248))), 1.0L);
  EXPECT_EQ(difficulty(with_target(pow2(247))), 2.0L);
  EXPECT_EQ(difficulty(with_target(pow2(220), pow2(224))), 16.0L);
  EXPECT_THROW(difficulty(with_target(0)), Error);
}

TEST(Retarget, FixedPointIsExact) {
  auto rng = RngStream::derive(1, "retarget");
  for (int i = 0; i < 200; ++i) {
    U256 target = (pow2(200) * (1 + rng.uniform_below(1u << 20))) % pow2(248) + 1;
    auto p = with_target(target);
    auto q = retarget(p, p.expected_time);
    EXPECT_EQ(q.target, p.target);
    EXPECT_EQ(difficulty(q), difficulty(p));
  }
}

TEST(Retarget, ScalesAndClamps) {
  auto p = with_target(pow2(240));
  EXPECT_EQ(retarget(p, 2 * p.expected_time).target, pow2(241));
  EXPECT_EQ(retarget(p, p.expected_time / 2).target, pow2(239));
  EXPECT_EQ(retarget(p, 100 * p.expected_time).target, pow2(242));
  EXPECT_EQ(retarget(p, 1).target, pow2(238));
  // Never above target_1.
  EXPECT_EQ(retarget(with_target(pow2(248)), 3 * p.expected_time).target, pow2(248));
  EXPECT_THROW(retarget(p, 0), Error);
}

TEST(RetargetProperty, DifficultyScalesInversely) {
  auto rng = RngStream::derive(2, "retarget");
  const auto p = with_target(pow2(230));
  for (int i = 0; i < 500; ++i) {
    const auto actual = 1 + rng.uniform_below(400);
    const long double ratio = static_cast<long double>(p.expected_time) / actual;
    const long double clamped = std::clamp(ratio, 0.25L, 4.0L);
    const long double got = difficulty(retarget(p, actual)) / difficulty(p);
    EXPECT_NEAR(static_cast<double>(got), static_cast<double>(clamped), 1e-12 * static_cast<double>(clamped)) << actual;
  }
}

TEST(Puzzle, VacuousAndImpossibleTargets) {
  ledger::BlockHeader h;
  h.target = u256_max();
  auto rng = RngStream::derive(3, "puzzle");
  auto r = solve_puzzle(h, with_target(u256_max(), u256_max()), rng);
  EXPECT_EQ(r.attempts, 1u);

  h.target = 0;
  PuzzleParams tiny;
  tiny.max_nonce = 1000;
  try {
    solve_puzzle(h, tiny, rng);
    FAIL() << "expected NonceExhausted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::nonce_exhausted);
  }
}

TEST(Puzzle, NeighbouringNonceFails) {
  ledger::BlockHeader h;
  h.target = pow2(240);  // 16 leading zero bits
  auto rng = RngStream::derive(4, "puzzle");
  PuzzleParams params;
  for (int i = 0; i < 5; ++i) {
    h.timestamp = static_cast<std::uint64_t>(i);
    auto sealed = solve_puzzle(h, params, rng).header;
    ASSERT_TRUE(verify_solution(sealed));
    sealed.nonce += 1;
    EXPECT_FALSE(verify_solution(sealed));
  }
}

// Attempts are geometric with success probability (target+1)/2^256.
TEST(PuzzleProperty, MeanAttemptsAndDoubling) {
  auto rng = RngStream::derive(5, "puzzle-stats");
  const double at8 = mean_attempts(pow2(248), 500, rng);
  EXPECT_GE(at8, 128.0);
  EXPECT_LE(at8, 512.0);
  const double at9 = mean_attempts(pow2(247), 500, rng);
  EXPECT_GE(at9 / at8, 1.5);
  EXPECT_LE(at9 / at8, 2.5);
  EXPECT_NEAR(static_cast<double>(success_probability(pow2(248))), 1.0 / 256, 1e-15);
}

TEST(Election, WeightedSumBeatsSingleHeavyVote) {
  Election e;
  e.ballots = {{"v1", "A"}, {"v2", "A"}, {"v3", "B"}};
  e.weights = {{"v1", 0.7}, {"v2", 0.6}, {"v3", 0.9}};
  EXPECT_EQ(elect_full_node(e), "A");
}

TEST(Election, DegenerateAndTies) {
  Election one;
  one.ballots = {{"v1", "solo"}};
  one.weights = {{"v1", 0.3}};
  EXPECT_EQ(elect_full_node(one), "solo");

  Election tie;
  tie.ballots = {{"v1", "edge-9"}, {"v2", "edge-2"}};
  tie.weights = {{"v1", 0.5}, {"v2", 0.5}};
  EXPECT_EQ(elect_full_node(tie), "edge-2");

  EXPECT_THROW(elect_full_node(Election{}), Error);
}

TEST(ElectionProperty, ArgmaxInvariantUnderRescaling) {
  auto rng = RngStream::derive(6, "election");
  for (int trial = 0; trial < 200; ++trial) {
    Election e;
    const auto voters = 2 + rng.uniform_below(15);
    for (std::uint64_t v = 0; v < voters; ++v) {
      const auto id = "v" + std::to_string(v);
      e.ballots[id] = "edge-" + std::to_string(rng.uniform_below(5));
      e.weights[id] = 0.01 + 0.98 * rng.uniform01();
    }
    const auto winner = elect_full_node(e);
    for (double k : {0.5, 0.01, 1.0 / 3.0}) {
      auto scaled = e;
      for (auto& [id, w] : scaled.weights) w *= k;
      EXPECT_EQ(elect_full_node(scaled), winner) << trial << " k=" << k;
    }
  }
}

TEST(Race, EarliestFinisherWins) {
  std::vector<RaceEntrant> entrants{{"edge-0", 1}, {"edge-1", 4}, {"edge-2", 2}};
  std::vector<std::uint64_t> attempts{10, 30, 16};
  auto out = decide_race(entrants, attempts);
  EXPECT_EQ(out.winner, 1u);  // 30/4 = 7.5 ticks
  EXPECT_EQ(out.elapsed_ticks, 8u);

  std::vector<std::uint64_t> tied{8, 32, 16};  // all finish at 8 ticks
  EXPECT_EQ(decide_race(entrants, tied).winner, 0u);
}

TEST(Race, RealModeSealsSolve) {
  std::vector<RaceEntrant> entrants{{"edge-0", 2}, {"edge-1", 3}};
  std::vector<ledger::BlockHeader> headers(2);
  for (auto& h : headers) h.target = pow2(248);
  headers[1].timestamp = 1;
  auto rng = RngStream::derive(7, "race");
  auto out = race_real(entrants, headers, PuzzleParams{}, rng);
  EXPECT_GE(out.attempts, 1u);
  EXPECT_LT(out.winner, 2u);

  auto fast = RngStream::derive(7, "race-fast");
  auto f = race_fast(entrants, pow2(248), fast);
  EXPECT_GE(f.elapsed_ticks, 1u);
}
