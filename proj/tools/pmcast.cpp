// pmcast: compile patterns, learn Pattern Markov Chains, and run online
// forecasting over event streams.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/config.hpp"
#include "pmcast/engine.hpp"
#include "pmcast/forecast.hpp"
#include "pmcast/metrics.hpp"
#include "pmcast/model_io.hpp"
#include "pmcast/pipeline.hpp"
#include "pmcast/pmc.hpp"
#include "pmcast/stream_io.hpp"
#include "pmcast/synthgen.hpp"

using namespace pmcast;

namespace {

constexpr int kExitRejected = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::string> pattern;
  std::optional<std::string> alphabet;  // comma separated
  std::optional<std::size_t> order;
  std::optional<std::string> orders;
  std::optional<std::string> p_fc;      // comma separated
  std::optional<std::size_t> max_spread;
  std::optional<std::uint64_t> warmup;
  std::optional<std::size_t> horizon_cap;
  std::optional<double> smoothing;
  std::optional<std::string> input;
  std::optional<std::string> generator;
  std::optional<std::string> partition;
  std::optional<std::string> model_out;
  std::optional<std::string> events_out;
  std::optional<std::string> report_out;
  std::optional<std::string> table_out;
  bool dedupe = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.pattern) cfg.pattern = *o.pattern;
  if (o.alphabet) cfg.alphabet = split_list(*o.alphabet);
  if (o.order) cfg.order = *o.order;
  if (o.orders) {
    cfg.orders.clear();
    for (const auto& s : split_list(*o.orders)) cfg.orders.push_back(std::stoul(s));
  }
  if (o.p_fc) {
    cfg.p_fc.clear();
    for (const auto& s : split_list(*o.p_fc)) cfg.p_fc.push_back(std::stod(s));
  }
  if (o.max_spread) cfg.max_spread = *o.max_spread;
  if (o.warmup) cfg.warmup = *o.warmup;
  if (o.horizon_cap) cfg.horizon_cap = *o.horizon_cap;
  if (o.smoothing) cfg.smoothing = *o.smoothing;
  if (o.input) {
    cfg.input = *o.input;
    cfg.generator_path.reset();
    cfg.generator.reset();
  }
  if (o.generator) {
    cfg.generator_path = *o.generator;
    cfg.generator.reset();
    cfg.input.reset();
  }
  if (o.partition) cfg.partition_attribute = *o.partition;
  if (o.model_out) cfg.output.model = *o.model_out;
  if (o.events_out) cfg.output.events = *o.events_out;
  if (o.report_out) cfg.output.report = *o.report_out;
  if (o.table_out) cfg.output.table = *o.table_out;
  if (o.dedupe) cfg.dedupe = true;
  if (cfg.orders.empty()) cfg.orders = {cfg.order};
  validate_config(cfg);
  return cfg;
}

Alphabet config_alphabet(const RunConfig& cfg) {
  if (cfg.alphabet.empty()) throw ConfigError("no alphabet configured");
  return Alphabet(cfg.alphabet);
}

/// Events from the configured input file or generator spec.
ReadResult load_stream(const RunConfig& cfg, const Alphabet& alphabet, PartitionRegistry& registry) {
  if (cfg.input) {
    std::ifstream in(*cfg.input);
    if (!in) throw ConfigError("cannot open " + *cfg.input);
    return read_events(in, alphabet, cfg.read_options(), registry);
  }
  std::optional<GeneratorSpec> spec = cfg.generator;
  if (!spec && cfg.generator_path) spec = load_spec(*cfg.generator_path);
  if (!spec) throw ConfigError("no input stream: set input or generator");
  if (!(spec->alphabet == alphabet)) throw ConfigError("generator alphabet differs from the configured alphabet");
  return ReadResult{generate(*spec), 0, {}};
}

void report_rejections(const ReadResult& r) {
  for (const auto& d : r.diagnostics) std::cerr << "error: " << d << '\n';
  if (r.rejected > 0) std::cerr << "error: " << r.rejected << " event(s) rejected\n";
}

/// Output stream for a path; "-" or unset falls back to `fallback`.
class Sink {
 public:
  Sink(const std::optional<std::string>& path, std::ostream* fallback) {
    if (path && *path != "-") {
      file_ = std::make_unique<std::ofstream>(*path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ConfigError("cannot write " + *path);
      out_ = file_.get();
    } else {
      out_ = fallback;
    }
  }
  std::ostream* get() const { return out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

void print_clusters(std::ostream& out, const Dfa& dfa) {
  out << "states: " << dfa.num_states() << '\n';
  std::map<StateId, std::vector<StateId>> clusters;
  for (StateId q = 0; q < dfa.num_states(); ++q) clusters[dfa.origin[q]].push_back(q);
  for (const auto& [origin, members] : clusters) {
    out << "origin " << origin << ':';
    for (StateId q : members) out << ' ' << q << '[' << state_label(dfa, q) << (dfa.is_final(q) ? ",final" : "") << ']';
    out << '\n';
  }
}

Dfa compile_from(const RunConfig& cfg, const Alphabet& alphabet, std::size_t order) {
  if (nullable(parse_pattern(cfg.pattern, alphabet)))
    std::cerr << "warning: pattern accepts the empty string; every event is a match\n";
  return compile_pattern(cfg.pattern, alphabet, order);
}

int cmd_compile(const Overrides& o) {
  RunConfig cfg = resolve_config(o);
  Alphabet alphabet = config_alphabet(cfg);
  Dfa dfa = compile_from(cfg, alphabet, cfg.order);
  if (cfg.output.model) save_model(dfa, *cfg.output.model);
  print_clusters(std::cout, dfa);
  return 0;
}

int cmd_learn(const Overrides& o) {
  RunConfig cfg = resolve_config(o);
  Alphabet alphabet = config_alphabet(cfg);
  Dfa dfa = compile_from(cfg, alphabet, cfg.order);
  PartitionRegistry registry;
  ReadResult stream = load_stream(cfg, alphabet, registry);
  report_rejections(stream);
  if (stream.events.size() < cfg.warmup)
    throw StreamError("insufficient events: warm-up needs " + std::to_string(cfg.warmup) + ", stream has " +
                      std::to_string(stream.events.size()));
  CountMatrix counts = warm_up(dfa, stream.events, cfg.warmup);
  Pmc pmc = estimate_matrix(counts, dfa, cfg.smoothing);
  if (cfg.warmup == 0) std::cerr << "warning: empty warm-up; all rows are uniform over their successors\n";

  std::vector<StateId> unvisited;
  std::cout << "state,label,visits,outgoing\n";
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    std::cout << q << ',' << state_label(dfa, q) << ',' << counts.visits[q] << ',' << counts.outgoing(q) << '\n';
    if (!dfa.is_final(q) && counts.outgoing(q) == 0) unvisited.push_back(q);
  }
  if (!unvisited.empty()) {
    std::cerr << "warning: " << unvisited.size() << " non-final state(s) without observed transitions:";
    for (StateId q : unvisited) std::cerr << ' ' << q;
    std::cerr << '\n';
  }
  if (cfg.output.model) save_model(pmc, *cfg.output.model);
  if (cfg.output.table) {
    ForecastSettings settings{cfg.p_fc.front(), cfg.max_spread, cfg.horizon_cap, kDefaultHorizonMass};
    Sink sink(cfg.output.table, &std::cout);
    write_forecast_table(*sink.get(), dfa, build_forecast_table(pmc, settings));
  }
  return stream.rejected > 0 ? kExitRejected : 0;
}

int cmd_run(const Overrides& o, const std::string& model_path) {
  RunConfig cfg = resolve_config(o);
  LoadedModel loaded = load_model(model_path);
  if (!loaded.pmc) throw ModelError(model_path + " has no transition matrix; run learn first");
  if (cfg.alphabet.empty()) cfg.alphabet = loaded.dfa.alphabet.symbols();
  if (cfg.pattern.empty()) cfg.pattern = loaded.dfa.pattern;
  if (!o.order && o.config_path.empty()) cfg.order = loaded.dfa.order;
  Alphabet alphabet = config_alphabet(cfg);
  auto model = std::make_shared<const Pmc>(std::move(*loaded.pmc));

  PartitionRegistry registry;
  ReadResult stream = load_stream(cfg, alphabet, registry);
  report_rejections(stream);

  Sink events(cfg.output.events, nullptr);
  Sink report_sink(cfg.output.report, &std::cout);
  if (events.get()) write_output_header(*events.get());
  write_report_header(*report_sink.get());

  const auto dists = waiting_times(*model, cfg.horizon_cap);
  for (double p_fc : cfg.p_fc) {
    ForecastSettings settings{p_fc, cfg.max_spread, cfg.horizon_cap, kDefaultHorizonMass};
    auto table = std::make_shared<const ForecastTable>(build_forecast_table(model->dfa, dists, settings));
    EngineConfig ecfg{cfg.pattern, alphabet, cfg.order, p_fc, cfg.max_spread, cfg.warmup, cfg.horizon_cap};
    std::optional<OutputWriter> writer;
    if (events.get()) writer.emplace(*events.get(), model->dfa, registry, p_fc, cfg.dedupe);
    Evaluation ev = evaluate(model, table, ecfg, stream.events, writer ? &*writer : nullptr);
    write_report_rows(*report_sink.get(), ev.report, p_fc);
    std::cerr << "p_fc=" << p_fc << " events=" << ev.consumed << " precision="
              << (ev.report.precision ? format_double(*ev.report.precision) : "N/A")
              << " throughput=" << static_cast<long long>(ev.throughput()) << " events/s\n";
  }
  return stream.rejected > 0 ? kExitRejected : 0;
}

int cmd_validate(const Overrides& o) {
  RunConfig cfg = resolve_config(o);
  Alphabet alphabet = config_alphabet(cfg);
  if (!cfg.generator && !cfg.generator_path) throw ConfigError("validate needs a generator spec");
  PartitionRegistry registry;
  ReadResult stream = load_stream(cfg, alphabet, registry);
  if (stream.events.size() < cfg.warmup) throw StreamError("generator length is below the warm-up count");

  auto rows = validate_protocol(stream.events, cfg.pattern, alphabet, cfg.orders, cfg.p_fc, cfg.warmup,
                                cfg.max_spread, cfg.horizon_cap, cfg.smoothing);
  Sink table(cfg.output.table, &std::cout);
  std::ostream& out = *table.get();
  out << "order,states,p_fc,baseline,precision,issued,scored,spread,distance\n";
  for (const auto& r : rows) {
    const auto& rep = r.report;
    out << r.order << ',' << r.states << ',' << format_double(r.p_fc) << ',' << format_double(r.p_fc) << ','
        << (rep.precision ? format_double(*rep.precision) : "N/A") << ',' << rep.total.issued << ','
        << rep.total.scored() << ',' << (rep.mean_spread ? format_double(*rep.mean_spread) : "N/A") << ','
        << (rep.mean_distance ? format_double(*rep.mean_distance) : "N/A") << '\n';
  }
  if (cfg.output.report) {
    Sink rs(cfg.output.report, &std::cout);
    *rs.get() << "order,";
    write_report_header(*rs.get());
    for (const auto& r : rows) {
      std::ostringstream buf;
      write_report_rows(buf, r.report, r.p_fc);
      std::string line;
      std::istringstream lines(buf.str());
      while (std::getline(lines, line)) *rs.get() << r.order << ',' << line << '\n';
    }
  }
  return 0;
}

int cmd_generate(const std::string& spec_path, const std::optional<std::string>& out_path,
                 const std::optional<std::string>& keys, std::uint64_t interleave_seed) {
  GeneratorSpec spec = load_spec(spec_path);
  PartitionRegistry registry;
  std::vector<Event> events = keys ? generate_partitioned(spec, split_list(*keys), interleave_seed, registry)
                                   : generate(spec);
  Sink sink(out_path, &std::cout);
  write_events(*sink.get(), events, spec.alphabet, registry, keys.has_value());
  return 0;
}

/// Pivots long-format report rows into a p_fc × state matrix for one metric.
int cmd_report(const std::string& metrics_path, const std::string& metric, const std::optional<std::string>& out_path) {
  std::ifstream in(metrics_path);
  if (!in) throw ConfigError("cannot open " + metrics_path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(metrics_path + " is empty");
  auto header = split_list(line);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError(metrics_path + " has no '" + name + "' column");
  };
  const std::size_t c_pfc = col("p_fc"), c_label = col("label"), c_metric = col("metric"), c_value = col("value");
  std::vector<std::string> labels, thresholds;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() < header.size() || f[c_metric] != metric) continue;
    if (std::find(labels.begin(), labels.end(), f[c_label]) == labels.end()) labels.push_back(f[c_label]);
    if (std::find(thresholds.begin(), thresholds.end(), f[c_pfc]) == thresholds.end()) thresholds.push_back(f[c_pfc]);
    cells[{f[c_pfc], f[c_label]}] = f[c_value];
  }
  if (labels.empty()) throw ConfigError("no rows for metric '" + metric + "'");
  Sink sink(out_path, &std::cout);
  std::ostream& out = *sink.get();
  out << "p_fc";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (const auto& t : thresholds) {
    out << t;
    for (const auto& l : labels) {
      auto it = cells.find({t, l});
      out << ',' << (it == cells.end() ? "" : it->second);
    }
    out << '\n';
  }
  return 0;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "Run configuration (JSON)");
  cmd->add_option("--pattern", o.pattern, "Pattern, e.g. 'a;(a+b)*;c'");
  cmd->add_option("--alphabet", o.alphabet, "Comma-separated event types");
  cmd->add_option("-m,--order", o.order, "Order m of the chain");
  cmd->add_option("--p-fc", o.p_fc, "Forecast threshold(s), comma-separated");
  cmd->add_option("--max-spread", o.max_spread, "Maximum interval spread");
  cmd->add_option("--warmup", o.warmup, "Warm-up event count");
  cmd->add_option("--horizon-cap", o.horizon_cap, "Largest waiting-time horizon");
  cmd->add_option("--smoothing", o.smoothing, "Additive smoothing for estimation");
  cmd->add_option("--input", o.input, "Event file");
  cmd->add_option("--generator", o.generator, "Generator spec instead of an event file");
  cmd->add_option("--partition", o.partition, "Partition attribute name");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event pattern recognition and forecasting with Pattern Markov Chains"};
  app.require_subcommand(1);
  Overrides o;
  std::string model_path, metrics_path, metric = "precision", spec_path;
  std::optional<std::string> out_path, keys;
  std::uint64_t interleave_seed = 0;

  auto* compile = app.add_subcommand("compile", "Compile a pattern into its automaton");
  add_common(compile, o);
  compile->add_option("-o,--model-out", o.model_out, "Model file to write");

  auto* learn = app.add_subcommand("learn", "Learn transition probabilities from the warm-up prefix");
  add_common(learn, o);
  learn->add_option("-o,--model-out", o.model_out, "Model file to write");
  learn->add_option("--table", o.table_out, "Forecast table CSV for the first threshold");

  auto* run = app.add_subcommand("run", "Recognize and forecast over a stream");
  add_common(run, o);
  run->add_option("--model", model_path, "Learned model file")->required();
  run->add_option("--events", o.events_out, "Per-event output CSV ('-' for stdout)");
  run->add_option("--report", o.report_out, "Metrics report CSV (default stdout)");
  run->add_flag("--dedupe", o.dedupe, "Collapse repeated per-event forecasts in the output");

  auto* validate = app.add_subcommand("validate", "Precision-versus-threshold table on a synthetic stream");
  add_common(validate, o);
  validate->add_option("--orders", o.orders, "Orders to compare, comma-separated");
  validate->add_option("-o,--table", o.table_out, "Output CSV (default stdout)");
  validate->add_option("--report", o.report_out, "Per-state report CSV");

  auto* report = app.add_subcommand("report", "Pivot a metrics report into a threshold × state matrix");
  report->add_option("--metrics", metrics_path, "Report CSV written by run")->required();
  report->add_option("--metric", metric, "precision, precision_gt, spread, distance, issued, ...");
  report->add_option("-o,--out", out_path, "Output CSV (default stdout)");

  auto* gen = app.add_subcommand("generate", "Write a synthetic event file from a generator spec");
  gen->add_option("--spec", spec_path, "Generator spec (JSON)")->required();
  gen->add_option("-o,--out", out_path, "Event file (default stdout)");
  gen->add_option("--keys", keys, "Comma-separated partition keys");
  gen->add_option("--interleave-seed", interleave_seed, "Seed for interleaving partitions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*compile) return cmd_compile(o);
    if (*learn) return cmd_learn(o);
    if (*run) return cmd_run(o, model_path);
    if (*validate) return cmd_validate(o);
    if (*report) return cmd_report(metrics_path, metric, out_path);
    if (*gen) return cmd_generate(spec_path, out_path, keys, interleave_seed);
  } catch (const SyntaxError& ex) {
    std::cerr << "error: syntax: " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
