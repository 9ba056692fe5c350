#ifndef PMCAST_CONFIG_HPP_
#define PMCAST_CONFIG_HPP_

// Run configuration: one JSON document. Every command-line flag overrides
// its field here.
//
//   {
//     "pattern": "a;(a+b)*;c",
//     "alphabet": ["a", "b", "c"],
//     "order": 1,                  // m
//     "orders": [0, 1, 2],         // validate only; defaults to [order]
//     "p_fc": [0.1, 0.5, 0.9],     // single number or sweep list
//     "max_spread": 10,            // optional
//     "warmup": 50000,
//     "horizon_cap": 200,
//     "smoothing": 0.0,
//     "input": "events.csv",       // or
//     "generator": "spec.json",    // path or inline spec object
//     "partition_attribute": "card",
//     "ground_truth_column": "ground_truth",
//     "symbol_map": {"IncreasingAmount": "inc"},
//     "dedupe": false,
//     "output": {"model": "m.json", "events": "out.csv", "report": "report.csv", "table": "table.csv"}
//   }

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pmcast/error.hpp"
#include "pmcast/pattern.hpp"
#include "pmcast/pmc.hpp"
#include "pmcast/stream_io.hpp"
#include "pmcast/synthgen.hpp"

namespace pmcast {

struct OutputPaths {
  std::optional<std::string> model;
  std::optional<std::string> events;
  std::optional<std::string> report;
  std::optional<std::string> table;
};

struct RunConfig {
  std::string pattern;
  std::vector<std::string> alphabet;
  std::size_t order = 0;
  std::vector<std::size_t> orders;
  std::vector<double> p_fc{0.5};
  std::optional<std::size_t> max_spread;
  std::uint64_t warmup = 0;
  std::size_t horizon_cap = kDefaultHorizonCap;
  double smoothing = 0.0;
  std::optional<std::string> input;
  std::optional<std::string> generator_path;
  std::optional<GeneratorSpec> generator;  // inline spec
  std::optional<std::string> partition_attribute;
  std::string ground_truth_column = "ground_truth";
  std::map<std::string, std::string> symbol_map;
  bool dedupe = false;
  OutputPaths output;

  ReadOptions read_options() const {
    ReadOptions opts;
    opts.partition_attribute = partition_attribute;
    opts.ground_truth_column = ground_truth_column;
    opts.symbol_map = symbol_map;
    return opts;
  }
};

namespace detail {

template <typename T>
std::optional<T> opt_field(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("config field '") + key + "': " + ex.what());
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  using detail::opt_field;
  if (auto v = opt_field<std::string>(doc, "pattern")) cfg.pattern = *v;
  if (auto v = opt_field<std::vector<std::string>>(doc, "alphabet")) cfg.alphabet = *v;
  if (auto v = opt_field<std::size_t>(doc, "order")) cfg.order = *v;
  if (auto v = opt_field<std::vector<std::size_t>>(doc, "orders")) cfg.orders = *v;
  if (doc.contains("p_fc")) {
    const auto& p = doc.at("p_fc");
    if (p.is_number())
      cfg.p_fc = {p.get<double>()};
    else if (auto v = opt_field<std::vector<double>>(doc, "p_fc"))
      cfg.p_fc = *v;
  }
  cfg.max_spread = opt_field<std::size_t>(doc, "max_spread");
  if (auto v = opt_field<std::uint64_t>(doc, "warmup")) cfg.warmup = *v;
  if (auto v = opt_field<std::size_t>(doc, "horizon_cap")) cfg.horizon_cap = *v;
  if (auto v = opt_field<double>(doc, "smoothing")) cfg.smoothing = *v;
  cfg.input = opt_field<std::string>(doc, "input");
  if (doc.contains("generator")) {
    const auto& g = doc.at("generator");
    if (g.is_string())
      cfg.generator_path = g.get<std::string>();
    else if (g.is_object())
      cfg.generator = spec_from_json(g);
  }
  cfg.partition_attribute = opt_field<std::string>(doc, "partition_attribute");
  if (auto v = opt_field<std::string>(doc, "ground_truth_column")) cfg.ground_truth_column = *v;
  if (auto v = opt_field<std::map<std::string, std::string>>(doc, "symbol_map")) cfg.symbol_map = *v;
  if (auto v = opt_field<bool>(doc, "dedupe")) cfg.dedupe = *v;
  if (doc.contains("output") && doc.at("output").is_object()) {
    const auto& o = doc.at("output");
    cfg.output.model = opt_field<std::string>(o, "model");
    cfg.output.events = opt_field<std::string>(o, "events");
    cfg.output.report = opt_field<std::string>(o, "report");
    cfg.output.table = opt_field<std::string>(o, "table");
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in, nullptr, true, true));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError("config parse error: " + std::string(ex.what()));
  }
}

/// Checks value ranges and that referenced input files exist.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.p_fc.empty()) throw ConfigError("p_fc list is empty");
  for (double p : cfg.p_fc)
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p_fc values must lie in (0,1]");
  if (cfg.horizon_cap == 0) throw ConfigError("horizon_cap must be positive");
  if (cfg.smoothing < 0.0) throw ConfigError("smoothing must be non-negative");
  if (cfg.input && !std::filesystem::exists(*cfg.input)) throw ConfigError("input file " + *cfg.input + " not found");
  if (cfg.generator_path && !std::filesystem::exists(*cfg.generator_path))
    throw ConfigError("generator spec " + *cfg.generator_path + " not found");
}

}  // namespace pmcast

#endif  // PMCAST_CONFIG_HPP_
