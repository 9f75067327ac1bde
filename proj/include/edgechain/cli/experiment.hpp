#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "edgechain/cli/config_file.hpp"
#include "edgechain/ledger/chain.hpp"
#include "edgechain/simnet/simulation.hpp"

namespace edgechain::cli {

enum class Mode { run, sweep, baseline_compare, verify_chain, prove };

struct ExperimentSpec {
  Mode mode = Mode::run;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path output_dir;  // empty: $EDGECHAIN_OUT_DIR, else ./edgechain-out
  std::vector<std::pair<std::string, std::string>> overrides;  // applied in order, after the file
  std::vector<std::uint64_t> seeds;  // empty: the config seed
  std::size_t replications = 0;      // >0 and no seeds: config seed, seed+1, ...
  std::vector<std::uint32_t> p_grid;
  std::vector<double> attack_grid;
  bool timing = false;  // wall-clock runtime_ms; otherwise the column is 0
  bool export_chain = false;
  unsigned workers = 0;  // 0: hardware concurrency
  // verify-chain / prove
  std::filesystem::path chain_path;
  std::string tx_hash;
  std::optional<std::filesystem::path> proof_path;  // prove: verify this proof instead of creating one
};

// One line of metrics.csv.
struct MetricsRow {
  std::uint32_t p = 0;
  double attack_rate = 0;
  std::uint64_t seed = 0;
  std::uint64_t illegal_sent = 0;
  std::uint64_t illegal_intercepted = 0;
  double interception_rate = 0;
  std::uint64_t chain_height = 0;
  std::uint64_t runtime_ms = 0;
};

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline constexpr std::string_view kMetricsHeader =
    "p,attack_rate,seed,illegal_sent,illegal_intercepted,interception_rate,chain_height,runtime_ms";

inline void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows) {
  os << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    os << r.p << ',' << format_double(r.attack_rate) << ',' << r.seed << ',' << r.illegal_sent << ','
       << r.illegal_intercepted << ',' << format_double(r.interception_rate) << ',' << r.chain_height << ','
       << r.runtime_ms << '\n';
  }
}

inline MetricsRow to_row(const simnet::SimConfig& cfg, const simnet::SimMetrics& m, std::uint64_t runtime_ms) {
  return {cfg.supporters, cfg.attack_rate, cfg.seed, m.illegal_sent, m.illegal_intercepted, m.interception_rate,
          m.chain_height, runtime_ms};
}

struct GridSummary {
  std::uint32_t p = 0;
  double attack_rate = 0;
  std::size_t replications = 0;
  double mean = 0;
  double std_error = 0;
};

// Mean and standard error of interception_rate per (p, attack_rate).
inline std::vector<GridSummary> summarize(std::span<const MetricsRow> rows) {
  std::map<std::pair<std::uint32_t, double>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.p, r.attack_rate}].push_back(r.interception_rate);
  std::vector<GridSummary> out;
  for (const auto& [key, rates] : groups) {
    GridSummary s{key.first, key.second, rates.size(), 0, 0};
    for (double r : rates) s.mean += r;
    s.mean /= static_cast<double>(rates.size());
    if (rates.size() > 1) {
      double ss = 0;
      for (double r : rates) ss += (r - s.mean) * (r - s.mean);
      s.std_error = std::sqrt(ss / static_cast<double>(rates.size() - 1) / static_cast<double>(rates.size()));
    }
    out.push_back(s);
  }
  return out;
}

// Runs tasks on a small worker pool; results land by index, so output
// order never depends on scheduling.
template <typename Result>
std::vector<Result> run_parallel(std::size_t n, unsigned workers, const std::function<Result(std::size_t)>& task) {
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

struct TimedRun {
  simnet::SimMetrics metrics;
  std::uint64_t runtime_ms = 0;
};

inline TimedRun timed_simulation(const simnet::SimConfig& cfg, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = simnet::run_simulation(cfg);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(result.metrics), timing ? static_cast<std::uint64_t>(ms) : 0};
}

inline simnet::SimConfig resolve_config(const ExperimentSpec& spec) {
  simnet::SimConfig cfg = spec.config_path ? parse_config(*spec.config_path) : simnet::SimConfig{};
  for (const auto& [k, v] : spec.overrides) apply_setting(cfg, k, v);
  validate_schema(cfg);
  return cfg;
}

inline std::vector<std::uint64_t> resolve_seeds(const ExperimentSpec& spec, const simnet::SimConfig& cfg) {
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) {
    const std::size_t n = std::max<std::size_t>(1, spec.replications);
    for (std::size_t i = 0; i < n; ++i) seeds.push_back(cfg.seed + i);
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw Error(Errc::schema_violation, "seeds must be distinct");
  }
  return seeds;
}

inline std::filesystem::path resolve_output_dir(const ExperimentSpec& spec) {
  if (!spec.output_dir.empty()) return spec.output_dir;
  if (const char* env = std::getenv("EDGECHAIN_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "edgechain-out";
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::missing_file, "cannot write " + path.string());
  out << contents;
}

inline void write_file(const std::filesystem::path& path, const Bytes& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::missing_file, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
}

inline Bytes read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_file, path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::ostringstream os;
  write_metrics_csv(os, rows);
  return os.str();
}

inline double analytic_interception(std::uint32_t p, double d) { return 1.0 - std::pow(1.0 - d, static_cast<double>(p)); }

inline nlohmann::ordered_json summary_json(std::span<const GridSummary> grid, double d) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& g : grid) {
    arr.push_back({{"p", g.p},
                   {"attack_rate", g.attack_rate},
                   {"replications", g.replications},
                   {"mean_interception_rate", g.mean},
                   {"std_error", g.std_error},
                   {"analytic", analytic_interception(g.p, d)}});
  }
  return arr;
}

inline void write_transactions_csv(std::ostream& os, const ledger::Chain& chain) {
  os << "height,index,kind,tx_hash,block_hash\n";
  const auto path = chain.canonical();
  for (std::size_t h = 0; h < path.size(); ++h) {
    const auto block_hash = to_hex(path[h]->header.hash());
    for (std::size_t i = 0; i < path[h]->transactions.size(); ++i) {
      const auto& tx = path[h]->transactions[i];
      const char* kind = tx.kind == ledger::TxKind::delivery ? "delivery"
                         : tx.kind == ledger::TxKind::reward ? "reward"
                                                             : "registration";
      os << h << ',' << i << ',' << kind << ',' << to_hex(tx.hash()) << ',' << block_hash << '\n';
    }
  }
}

namespace detail {

inline int do_run(const ExperimentSpec& spec, std::ostream& out) {
  const auto cfg = resolve_config(spec);
  const auto dir = resolve_output_dir(spec);
  std::filesystem::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  auto result = simnet::run_simulation(cfg);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  const std::vector<MetricsRow> rows{to_row(cfg, result.metrics, spec.timing ? static_cast<std::uint64_t>(ms) : 0)};

  write_file(dir / "metrics.csv", metrics_csv(rows));
  {
    std::ostringstream os;
    messaging::MessageLogRow::write_csv(os, result.log);
    write_file(dir / "events.csv", os.str());
  }
  {
    std::ostringstream os;
    result.book.write_csv(os);
    write_file(dir / "balances.csv", os.str());
  }
  {
    std::ostringstream os;
    trust::TrustLedger::write_csv(os, result.trust.rows());
    write_file(dir / "trust.csv", os.str());
  }
  {
    std::ostringstream os;
    write_transactions_csv(os, result.chain);
    write_file(dir / "transactions.csv", os.str());
  }
  write_file(dir / "registry.txt", result.registry.encode());
  write_file(dir / "chain.bin", ledger::encode_chain(result.chain));

  const auto& m = result.metrics;
  nlohmann::ordered_json summary = {
      {"mode", "run"},
      {"seed", cfg.seed},
      {"p", cfg.supporters},
      {"attack_rate", cfg.attack_rate},
      {"detection_prob", cfg.detection_prob},
      {"illegal_sent", m.illegal_sent},
      {"illegal_intercepted", m.illegal_intercepted},
      {"legal_sent", m.legal_sent},
      {"legal_delivered", m.legal_delivered},
      {"rejected_at_screening", m.rejected_at_screening},
      {"unfunded", m.unfunded},
      {"interception_rate", m.interception_rate},
      {"analytic", analytic_interception(cfg.supporters, cfg.detection_prob)},
      {"chain_height", m.chain_height},
      {"tip", to_hex(result.chain.tip())},
  };
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  out << "interception_rate " << format_double(m.interception_rate) << " (" << m.illegal_intercepted << "/"
      << m.illegal_sent << "), chain height " << m.chain_height << ", tip " << to_hex(result.chain.tip()) << "\n";
  out << "wrote " << dir.string() << "\n";
  return 0;
}

struct GridPoint {
  std::uint32_t p;
  double attack;
  std::uint64_t seed;
};

inline std::vector<GridPoint> grid_points(const ExperimentSpec& spec, const simnet::SimConfig& cfg) {
  const auto seeds = resolve_seeds(spec, cfg);
  const auto ps = spec.p_grid.empty() ? std::vector<std::uint32_t>{2, 4, 8} : spec.p_grid;
  const auto attacks = spec.attack_grid.empty() ? std::vector<double>{cfg.attack_rate} : spec.attack_grid;
  std::vector<GridPoint> points;
  for (auto p : ps) {
    for (auto a : attacks) {
      for (auto s : seeds) points.push_back({p, a, s});
    }
  }
  return points;
}

inline simnet::SimConfig at_point(simnet::SimConfig cfg, const GridPoint& g) {
  cfg.supporters = g.p;
  cfg.attack_rate = g.attack;
  cfg.seed = g.seed;
  validate_schema(cfg);
  return cfg;
}

inline int do_sweep(const ExperimentSpec& spec, std::ostream& out) {
  const auto cfg = resolve_config(spec);
  const auto points = grid_points(spec, cfg);
  for (const auto& g : points) at_point(cfg, g);
  const auto dir = resolve_output_dir(spec);
  std::filesystem::create_directories(dir);

  auto rows = run_parallel<MetricsRow>(points.size(), spec.workers, [&](std::size_t i) {
    const auto c = at_point(cfg, points[i]);
    auto run = timed_simulation(c, spec.timing);
    return to_row(c, run.metrics, run.runtime_ms);
  });
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.p, a.attack_rate, a.seed) < std::tie(b.p, b.attack_rate, b.seed);
  });
  write_file(dir / "metrics.csv", metrics_csv(rows));
  const auto grid = summarize(rows);
  nlohmann::ordered_json summary = {{"mode", "sweep"}, {"detection_prob", cfg.detection_prob},
                                    {"grid", summary_json(grid, cfg.detection_prob)}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& g : grid) {
    out << "p=" << g.p << " attack=" << format_double(g.attack_rate) << " mean=" << format_double(g.mean)
        << " se=" << format_double(g.std_error) << "\n";
  }
  out << "wrote " << rows.size() << " rows to " << (dir / "metrics.csv").string() << "\n";
  return 0;
}

inline int do_baseline(const ExperimentSpec& spec, std::ostream& out) {
  const auto cfg = resolve_config(spec);
  const auto points = grid_points(spec, cfg);
  for (const auto& g : points) at_point(cfg, g);
  const auto dir = resolve_output_dir(spec);
  std::filesystem::create_directories(dir);

  using Pair = std::pair<MetricsRow, MetricsRow>;
  auto results = run_parallel<Pair>(points.size(), spec.workers, [&](std::size_t i) {
    const auto c = at_point(cfg, points[i]);
    auto run = timed_simulation(c, spec.timing);
    const auto t0 = std::chrono::steady_clock::now();
    const auto base = simnet::run_baseline(c);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return Pair{to_row(c, run.metrics, run.runtime_ms), to_row(c, base, spec.timing ? static_cast<std::uint64_t>(ms) : 0)};
  });
  std::vector<MetricsRow> proposed, baseline;
  for (auto& [a, b] : results) {
    proposed.push_back(a);
    baseline.push_back(b);
  }
  auto order = [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.p, a.attack_rate, a.seed) < std::tie(b.p, b.attack_rate, b.seed);
  };
  std::sort(proposed.begin(), proposed.end(), order);
  std::sort(baseline.begin(), baseline.end(), order);
  write_file(dir / "proposed.csv", metrics_csv(proposed));
  write_file(dir / "baseline.csv", metrics_csv(baseline));

  const auto gp = summarize(proposed);
  const auto gb = summarize(baseline);
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < gp.size(); ++i) {
    arr.push_back({{"p", gp[i].p},
                   {"attack_rate", gp[i].attack_rate},
                   {"proposed_mean", gp[i].mean},
                   {"proposed_std_error", gp[i].std_error},
                   {"baseline_mean", gb[i].mean},
                   {"baseline_std_error", gb[i].std_error},
                   {"baseline_detection_prob", simnet::baseline_detection_prob(gp[i].p, cfg.detection_prob)},
                   {"advantage", gp[i].mean - gb[i].mean}});
    out << "p=" << gp[i].p << " attack=" << format_double(gp[i].attack_rate) << " proposed=" << format_double(gp[i].mean)
        << " baseline=" << format_double(gb[i].mean) << "\n";
  }
  nlohmann::ordered_json summary = {{"mode", "baseline-compare"}, {"detection_prob", cfg.detection_prob}, {"grid", arr}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return 0;
}

inline int do_verify_chain(const ExperimentSpec& spec, std::ostream& out) {
  const auto ex = ledger::decode_chain(read_binary(spec.chain_path));
  const auto verdict = ledger::verify_block_sequence(ex.blocks, ex.params);
  if (!verdict.valid) {
    out << "invalid: block " << verdict.failed_height << ": " << ledger::verdict_name(verdict.reason) << "\n";
    return 1;
  }
  const auto tip = ex.blocks.empty() ? ledger::genesis_block().header.hash() : ex.blocks.back().header.hash();
  out << "valid: height " << ex.blocks.size() << " tip " << to_hex(tip) << "\n";
  return 0;
}

inline nlohmann::ordered_json proof_to_json(const Digest& tx_hash, std::uint64_t height, const Digest& block_hash,
                                            const ledger::MerkleProof& proof, const Digest& root) {
  auto siblings = nlohmann::ordered_json::array();
  for (const auto& s : proof.siblings) {
    siblings.push_back({{"hash", to_hex(s.sibling)}, {"side", s.side == ledger::Side::left ? "left" : "right"}});
  }
  return {{"tx_hash", to_hex(tx_hash)},       {"height", height},
          {"block_hash", to_hex(block_hash)}, {"leaf_index", proof.leaf_index},
          {"siblings", siblings},             {"merkle_root", to_hex(root)}};
}

// Light-node check: only the header at the claimed height is consulted.
inline bool verify_proof_json(const nlohmann::json& j, const ledger::ChainExport& ex, std::ostream& out) {
  const auto height = j.at("height").get<std::uint64_t>();
  if (height == 0 || height > ex.blocks.size()) {
    out << "no header at height " << height << "\n";
    return false;
  }
  const auto& header = ex.blocks[height - 1].header;
  ledger::MerkleProof proof;
  proof.leaf_index = j.at("leaf_index").get<std::size_t>();
  for (const auto& s : j.at("siblings")) {
    const auto side = s.at("side").get<std::string>();
    if (side != "left" && side != "right") throw Error(Errc::malformed, "proof side '" + side + "'");
    proof.siblings.push_back(
        {array_from_hex<32>(s.at("hash").get<std::string>()), side == "left" ? ledger::Side::left : ledger::Side::right});
  }
  const auto leaf = array_from_hex<32>(j.at("tx_hash").get<std::string>());
  return ledger::verify_merkle_proof(leaf, proof, header.merkle_root);
}

inline int do_prove(const ExperimentSpec& spec, std::ostream& out) {
  const auto ex = ledger::decode_chain(read_binary(spec.chain_path));
  if (spec.proof_path) {
    std::ifstream in(*spec.proof_path);
    if (!in) throw Error(Errc::missing_file, spec.proof_path->string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::malformed, e.what());
    }
    const bool ok = verify_proof_json(j, ex, out);
    out << "verified: " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : 1;
  }

  const auto target = array_from_hex<32>(spec.tx_hash);
  for (std::size_t h = 0; h < ex.blocks.size(); ++h) {
    const auto& block = ex.blocks[h];
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      if (block.transactions[i].hash() != target) continue;
      std::vector<Digest> leaves;
      for (const auto& tx : block.transactions) leaves.push_back(tx.hash());
      const auto tree = ledger::MerkleTree::build(leaves);
      const auto j = proof_to_json(target, h + 1, block.header.hash(), tree.proof(i), tree.root());
      const bool ok = verify_proof_json(nlohmann::json::parse(j.dump()), ex, out);
      if (!spec.output_dir.empty()) {
        std::filesystem::create_directories(spec.output_dir);
        write_file(spec.output_dir / "proof.json", j.dump(2) + "\n");
      }
      out << j.dump(2) << "\n";
      out << "verified: " << (ok ? "true" : "false") << "\n";
      return ok ? 0 : 1;
    }
  }
  out << "transaction " << spec.tx_hash << " not found\n";
  return 1;
}

}  // namespace detail

// Exit status: 0 success, 2 configuration/input error (diagnostic names the
// field), 1 invariant violation or failed verification.
inline int run_experiment(const ExperimentSpec& spec, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    switch (spec.mode) {
      case Mode::run: return detail::do_run(spec, out);
      case Mode::sweep: return detail::do_sweep(spec, out);
      case Mode::baseline_compare: return detail::do_baseline(spec, out);
      case Mode::verify_chain: return detail::do_verify_chain(spec, out);
      case Mode::prove: return detail::do_prove(spec, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::schema_violation:
      case Errc::invalid_config:
      case Errc::missing_file:
        return 2;
      case Errc::malformed:
        return spec.mode == Mode::verify_chain || spec.mode == Mode::prove ? 1 : 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace edgechain::cli
