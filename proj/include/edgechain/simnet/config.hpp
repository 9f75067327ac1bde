#pragma once

#include <cmath>
#include <string>

#include "edgechain/consensus/difficulty.hpp"
#include "edgechain/messaging.hpp"
#include "edgechain/rewards.hpp"
#include "edgechain/trust.hpp"

namespace edgechain::simnet {

enum class PuzzleMode { fast, real };

struct PuzzleConfig {
  consensus::PuzzleParams params;
  PuzzleMode mode = PuzzleMode::fast;
  std::uint32_t candidates = 3;  // top-K voted edge nodes that race
  std::uint64_t hash_rate_min = 1;
  std::uint64_t hash_rate_max = 4;
};

struct RewardConfig {
  rewards::Units block_reward = 1000 * rewards::kUnit;
  rewards::Units supporter_fee = 1 * rewards::kUnit;
  rewards::Units initial_endowment = 100 * rewards::kUnit;
};

struct SimConfig {
  std::uint32_t n_infrastructures = 100;
  std::uint32_t n_edge_nodes = 20;
  std::uint32_t n_communities = 20;
  double connection_rate = 0.6;
  std::uint32_t trust_init_min = 1;
  std::uint32_t trust_init_max = 10;
  std::uint32_t quality_prior = 10;  // accepted pseudo-statuses seeding each quality history
  double attack_rate = 0.2;
  std::uint32_t supporters = 8;
  double detection_prob = 0.2;
  double false_flag_prob = 0.0;
  std::uint64_t n_messages = 10'000;
  std::uint32_t epoch_length = 50;
  std::uint64_t seed = 1;
  trust::TrustParams trust;
  PuzzleConfig puzzle;
  RewardConfig rewards;

  messaging::EndorsementPolicy policy() const {
    return {supporters, detection_prob, false_flag_prob, rewards.supporter_fee};
  }

  // Throws InvalidConfig naming the first offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& rule) {
      throw Error(Errc::invalid_config, field + " " + rule);
    };
    auto unit_interval = [&](double v, const char* field) {
      if (!(v >= 0.0 && v <= 1.0)) fail(field, "must be in [0,1]");
    };
    if (n_infrastructures < 2) fail("sim.n_infrastructures", "must be >= 2");
    if (n_edge_nodes < 1) fail("sim.n_edge_nodes", "must be >= 1");
    if (n_communities != n_edge_nodes) fail("sim.n_communities", "must equal sim.n_edge_nodes");
    unit_interval(connection_rate, "sim.connection_rate");
    unit_interval(attack_rate, "sim.attack_rate");
    unit_interval(detection_prob, "sim.detection_prob");
    unit_interval(false_flag_prob, "sim.false_flag_prob");
    if (trust_init_min > trust_init_max) fail("sim.trust_init_min", "must be <= sim.trust_init_max");
    if (trust_init_max == 0) fail("sim.trust_init_max", "must be >= 1");
    if (supporters < 1) fail("sim.supporters", "must be >= 1");
    if (supporters >= n_infrastructures) fail("sim.supporters", "must be < sim.n_infrastructures");
    if (epoch_length < 1) fail("sim.epoch_length", "must be >= 1");
    trust.validate();
    puzzle.params.validate();
    if (puzzle.candidates < 1) fail("puzzle.candidates", "must be >= 1");
    if (puzzle.hash_rate_min < 1) fail("puzzle.hash_rate_min", "must be >= 1");
    if (puzzle.hash_rate_min > puzzle.hash_rate_max) fail("puzzle.hash_rate_min", "must be <= puzzle.hash_rate_max");
    if (rewards.block_reward <= 0) fail("rewards.block_reward", "must be > 0");
    if (rewards.supporter_fee < 0) fail("rewards.supporter_fee", "must be >= 0");
    if (rewards.initial_endowment < 0) fail("rewards.initial_endowment", "must be >= 0");
  }
};

}  // namespace edgechain::simnet
