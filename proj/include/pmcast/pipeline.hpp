#ifndef PMCAST_PIPELINE_HPP_
#define PMCAST_PIPELINE_HPP_

// Compile / learn / evaluate steps shared by the command-line tool and the
// validation harness.

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/engine.hpp"
#include "pmcast/forecast.hpp"
#include "pmcast/metrics.hpp"
#include "pmcast/pmc.hpp"
#include "pmcast/stream_io.hpp"
#include "pmcast/synthgen.hpp"

namespace pmcast {

inline Pmc learn_model(const Dfa& dfa, std::span<const Event> stream, std::uint64_t warmup, double smoothing) {
  return estimate_matrix(warm_up(dfa, stream, static_cast<std::size_t>(warmup)), dfa, smoothing);
}

struct Evaluation {
  MetricsReport report;
  FinishReport finish;
  std::uint64_t consumed = 0;
  double seconds = 0.0;  // event loop only

  double throughput() const { return seconds > 0.0 ? static_cast<double>(consumed) / seconds : 0.0; }
};

/// Runs the whole stream through a fresh engine. The first config.warmup_count
/// events only drive recognition.
inline Evaluation evaluate(const std::shared_ptr<const Pmc>& model, const std::shared_ptr<const ForecastTable>& table,
                           const EngineConfig& config, std::span<const Event> stream, OutputWriter* writer = nullptr) {
  Engine engine(config, model, table);
  auto t0 = std::chrono::steady_clock::now();
  if (writer) {
    for (const Event& ev : stream) writer->write(engine.process(ev));
  } else {
    for (const Event& ev : stream) engine.process(ev);
  }
  auto t1 = std::chrono::steady_clock::now();
  Evaluation out;
  out.finish = engine.finish();
  out.consumed = engine.consumed();
  out.seconds = std::chrono::duration<double>(t1 - t0).count();
  out.report = report(engine.metrics(), engine.dfa());
  return out;
}

struct ValidationRow {
  std::size_t order = 0;
  double p_fc = 0.0;
  std::size_t states = 0;
  MetricsReport report;
};

/// Synthetic validation protocol: for every order, compile and learn from
/// the warm-up prefix, then for every threshold rebuild only the forecast
/// table and score the whole stream.
inline std::vector<ValidationRow> validate_protocol(std::span<const Event> stream, const std::string& pattern,
                                                    const Alphabet& alphabet, const std::vector<std::size_t>& orders,
                                                    const std::vector<double>& thresholds, std::uint64_t warmup,
                                                    std::optional<std::size_t> max_spread, std::size_t horizon_cap,
                                                    double smoothing) {
  std::vector<ValidationRow> rows;
  for (std::size_t m : orders) {
    Dfa dfa = compile_pattern(pattern, alphabet, m);
    auto model = std::make_shared<const Pmc>(learn_model(dfa, stream, warmup, smoothing));
    const auto dists = waiting_times(*model, horizon_cap);
    for (double p_fc : thresholds) {
      ForecastSettings settings{p_fc, max_spread, horizon_cap, kDefaultHorizonMass};
      auto table = std::make_shared<const ForecastTable>(build_forecast_table(model->dfa, dists, settings));
      EngineConfig cfg{pattern, alphabet, m, p_fc, max_spread, warmup, horizon_cap};
      rows.push_back({m, p_fc, dfa.num_states(), evaluate(model, table, cfg, stream).report});
    }
  }
  return rows;
}

}  // namespace pmcast

#endif  // PMCAST_PIPELINE_HPP_
