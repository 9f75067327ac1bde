#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

#include "edgechain/simnet/config.hpp"

namespace edgechain::cli {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, const std::string& rule) {
  throw Error(Errc::schema_violation, key + " = '" + value + "': " + rule);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "expected an integer");
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "expected a number");
  return out;
}

// Decimal reward units ("12.5") to fixed-point sub-units, exactly.
inline rewards::Units parse_units(const std::string& key, const std::string& value) {
  const auto dot = value.find('.');
  const std::string whole = value.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : value.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || whole.find_first_not_of("0123456789") != std::string::npos ||
      frac.find_first_not_of("0123456789") != std::string::npos) {
    bad_value(key, value, "expected a non-negative decimal with at most 6 fractional digits");
  }
  frac.append(6 - frac.size(), '0');
  return parse_int<rewards::Units>(key, whole) * rewards::kUnit + parse_int<rewards::Units>(key, frac);
}

// "2^248", "0x..." hex, or a decimal integer.
inline U256 parse_u256(const std::string& key, const std::string& value) {
  try {
    if (value.rfind("2^", 0) == 0) {
      const auto bits = parse_int<unsigned>(key, value.substr(2));
      if (bits > 255) bad_value(key, value, "exponent must be <= 255");
      return pow2(bits);
    }
    if (value.rfind("0x", 0) == 0) return u256_from_hex(value.substr(2));
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
      bad_value(key, value, "expected 2^N, 0x-hex or a decimal integer");
    }
    return U256(value);
  } catch (const Error& e) {
    if (e.code() == Errc::schema_violation) throw;
    bad_value(key, value, "expected 2^N, 0x-hex or a decimal integer");
  } catch (const std::exception&) {
    bad_value(key, value, "expected 2^N, 0x-hex or a decimal integer");
  }
}

}  // namespace detail

// Sets one field by its dotted name ("sim.seed", "trust.alpha", ...).
// Unknown names and unparsable values are SchemaViolations.
inline void apply_setting(simnet::SimConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  using namespace detail;
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  auto u32 = [&] { return parse_int<std::uint32_t>(key, v); };
  auto u64 = [&] { return parse_int<std::uint64_t>(key, v); };
  auto dbl = [&] { return parse_double(key, v); };

  if (key == "sim.n_infrastructures") cfg.n_infrastructures = u32();
  else if (key == "sim.n_edge_nodes") cfg.n_edge_nodes = u32();
  else if (key == "sim.n_communities") cfg.n_communities = u32();
  else if (key == "sim.connection_rate") cfg.connection_rate = dbl();
  else if (key == "sim.trust_init_min") cfg.trust_init_min = u32();
  else if (key == "sim.trust_init_max") cfg.trust_init_max = u32();
  else if (key == "sim.quality_prior") cfg.quality_prior = u32();
  else if (key == "sim.attack_rate") cfg.attack_rate = dbl();
  else if (key == "sim.supporters") cfg.supporters = u32();
  else if (key == "sim.detection_prob") cfg.detection_prob = dbl();
  else if (key == "sim.false_flag_prob") cfg.false_flag_prob = dbl();
  else if (key == "sim.n_messages") cfg.n_messages = u64();
  else if (key == "sim.epoch_length") cfg.epoch_length = u32();
  else if (key == "sim.seed") cfg.seed = u64();
  else if (key == "trust.alpha") cfg.trust.alpha = dbl();
  else if (key == "trust.beta") cfg.trust.beta = dbl();
  else if (key == "trust.gamma") cfg.trust.gamma = dbl();
  else if (key == "trust.delta") cfg.trust.delta = dbl();
  else if (key == "trust.credit_threshold") cfg.trust.credit_threshold = dbl();
  else if (key == "puzzle.mode") {
    if (v == "fast") cfg.puzzle.mode = simnet::PuzzleMode::fast;
    else if (v == "real") cfg.puzzle.mode = simnet::PuzzleMode::real;
    else bad_value(key, v, "expected 'fast' or 'real'");
  }
  else if (key == "puzzle.target") cfg.puzzle.params.target = parse_u256(key, v);
  else if (key == "puzzle.target_at_difficulty_1") cfg.puzzle.params.target_at_difficulty_1 = parse_u256(key, v);
  else if (key == "puzzle.expected_time") cfg.puzzle.params.expected_time = u64();
  else if (key == "puzzle.max_nonce") cfg.puzzle.params.max_nonce = u64();
  else if (key == "puzzle.candidates") cfg.puzzle.candidates = u32();
  else if (key == "puzzle.hash_rate_min") cfg.puzzle.hash_rate_min = u64();
  else if (key == "puzzle.hash_rate_max") cfg.puzzle.hash_rate_max = u64();
  else if (key == "rewards.block_reward") cfg.rewards.block_reward = parse_units(key, v);
  else if (key == "rewards.supporter_fee") cfg.rewards.supporter_fee = parse_units(key, v);
  else if (key == "rewards.initial_endowment") cfg.rewards.initial_endowment = parse_units(key, v);
  else throw Error(Errc::schema_violation, "unknown field '" + key + "'");
}

// Re-raises range failures from SimConfig::validate as SchemaViolations.
inline void validate_schema(const simnet::SimConfig& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.code() != Errc::invalid_config) throw;
    std::string what = e.what();
    throw Error(Errc::schema_violation, what.substr(what.find(": ") + 2));
  }
}

inline simnet::SimConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::schema_violation, std::string("line ") + std::to_string(e.line()) + ": " + e.message());
  }
  simnet::SimConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(Errc::schema_violation, "field '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) apply_setting(cfg, section + "." + key, value.get_value<std::string>());
  }
  validate_schema(cfg);
  return cfg;
}

// Unspecified fields keep their defaults (the 100/20/20/0.6 topology).
inline simnet::SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace edgechain::cli
