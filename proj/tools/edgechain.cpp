// edgechain: experiment driver for the blockchain-backed IoT transmission
// simulator. See README.md for the command reference.

#include <CLI11.hpp>

#include <iostream>

#include "edgechain/cli/experiment.hpp"

namespace {

using edgechain::cli::ExperimentSpec;
using edgechain::cli::Mode;

// Flags that mirror SimConfig fields; each becomes a "section.key" override.
struct FieldFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> supporters;
  std::optional<double> attack_rate;
  std::optional<double> detection_prob;
  std::optional<std::uint64_t> messages;
  std::optional<std::uint32_t> epoch_length;
  std::optional<std::string> puzzle_mode;
  std::vector<std::string> sets;
};

void add_sim_options(CLI::App* cmd, ExperimentSpec& spec, FieldFlags& f, std::string& config) {
  cmd->add_option("-c,--config", config, "Configuration file (INI-style sections)");
  cmd->add_option("-o,--out", spec.output_dir, "Output directory (default: $EDGECHAIN_OUT_DIR or ./edgechain-out)");
  cmd->add_option("--seed", f.seed, "sim.seed");
  cmd->add_option("-p,--supporters", f.supporters, "sim.supporters");
  cmd->add_option("--attack-rate", f.attack_rate, "sim.attack_rate");
  cmd->add_option("--detection-prob", f.detection_prob, "sim.detection_prob");
  cmd->add_option("-n,--messages", f.messages, "sim.n_messages");
  cmd->add_option("--epoch-length", f.epoch_length, "sim.epoch_length");
  cmd->add_option("--puzzle-mode", f.puzzle_mode, "puzzle.mode (fast|real)");
  cmd->add_option("--set", f.sets, "Override any field: section.key=value (repeatable)");
  cmd->add_flag("--timing", spec.timing, "Record wall-clock runtime_ms (otherwise 0, keeping output reproducible)");
  cmd->add_option("-j,--workers", spec.workers, "Parallel replications (default: hardware threads)");
}

void add_grid_options(CLI::App* cmd, ExperimentSpec& spec) {
  cmd->add_option("--p-grid", spec.p_grid, "Supporter counts (default 2,4,8)")->delimiter(',');
  cmd->add_option("--attack-grid", spec.attack_grid, "Attack rates (default: config value)")->delimiter(',');
  cmd->add_option("--replications", spec.replications, "Seeds seed..seed+N-1");
  cmd->add_option("--seed-list", spec.seeds, "Explicit seeds")->delimiter(',');
}

void collect_overrides(ExperimentSpec& spec, const FieldFlags& f, const std::string& config) {
  if (!config.empty()) spec.config_path = config;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw edgechain::Error(edgechain::Errc::schema_violation, "--set expects key=value, got '" + s + "'");
    spec.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  // Dedicated flags beat --set and the file.
  if (f.seed) spec.overrides.emplace_back("sim.seed", std::to_string(*f.seed));
  if (f.supporters) spec.overrides.emplace_back("sim.supporters", std::to_string(*f.supporters));
  if (f.attack_rate) spec.overrides.emplace_back("sim.attack_rate", edgechain::cli::format_double(*f.attack_rate));
  if (f.detection_prob) spec.overrides.emplace_back("sim.detection_prob", edgechain::cli::format_double(*f.detection_prob));
  if (f.messages) spec.overrides.emplace_back("sim.n_messages", std::to_string(*f.messages));
  if (f.epoch_length) spec.overrides.emplace_back("sim.epoch_length", std::to_string(*f.epoch_length));
  if (f.puzzle_mode) spec.overrides.emplace_back("puzzle.mode", *f.puzzle_mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgechain: blockchain-backed reliable IoT data transmission simulator"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  FieldFlags flags;
  std::string config;

  auto* run = app.add_subcommand("run", "Single simulation; writes metrics, events, balances, trust, chain");
  add_sim_options(run, spec, flags, config);

  auto* sweep = app.add_subcommand("sweep", "Grid over supporters x attack rate x seeds");
  add_sim_options(sweep, spec, flags, config);
  add_grid_options(sweep, spec);

  auto* baseline = app.add_subcommand("baseline", "Proposed scheme vs centralized baseline on identical traffic");
  add_sim_options(baseline, spec, flags, config);
  add_grid_options(baseline, spec);

  auto* verify = app.add_subcommand("verify-chain", "Re-validate an exported chain file");
  verify->add_option("chain", spec.chain_path, "Chain file")->required();

  auto* prove = app.add_subcommand("prove", "Merkle inclusion proof for a transaction, checked against its header");
  prove->add_option("--chain", spec.chain_path, "Chain file")->required();
  auto* tx_opt = prove->add_option("--tx", spec.tx_hash, "Transaction hash (hex)");
  auto* verify_opt = prove->add_option("--verify", spec.proof_path, "Verify an existing proof.json instead");
  tx_opt->excludes(verify_opt);
  prove->add_option("-o,--out", spec.output_dir, "Also write proof.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) spec.mode = Mode::run;
  if (sweep->parsed()) spec.mode = Mode::sweep;
  if (baseline->parsed()) spec.mode = Mode::baseline_compare;
  if (verify->parsed()) spec.mode = Mode::verify_chain;
  if (prove->parsed()) {
    spec.mode = Mode::prove;
    if (spec.tx_hash.empty() && !spec.proof_path) {
      std::cerr << "error: prove needs --tx or --verify\n";
      return 2;
    }
  }

  try {
    collect_overrides(spec, flags, config);
  } catch (const edgechain::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return edgechain::cli::run_experiment(spec);
}
