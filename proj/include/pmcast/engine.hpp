#ifndef PMCAST_ENGINE_HPP_
#define PMCAST_ENGINE_HPP_

// Online recognition and forecasting loop. Each partition key gets its own
// run; all runs share one immutable model and forecast table.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/error.hpp"
#include "pmcast/event.hpp"
#include "pmcast/forecast.hpp"
#include "pmcast/metrics.hpp"
#include "pmcast/pattern.hpp"
#include "pmcast/pmc.hpp"

namespace pmcast {

struct EngineConfig {
  std::string pattern;
  Alphabet alphabet;
  std::size_t order = 0;
  double p_fc = 0.5;
  std::optional<std::size_t> max_spread;
  std::uint64_t warmup_count = 0;  // first events of the whole stream, excluded from metrics
  std::size_t horizon_cap = kDefaultHorizonCap;
};

struct RunState {
  PartitionId partition = 0;
  StateId current = Dfa::start();
  std::int64_t last_index = 0;
  bool started = false;
  bool label_since_start = false;  // OR of ground-truth labels of the partial match
  std::vector<PendingForecast> pending;
};

enum class Emission : std::uint8_t { None, Interval, NoForecast };

struct EngineOutput {
  PartitionId partition = 0;
  std::int64_t index = 0;
  SymbolId symbol = 0;
  StateId state = 0;
  Emission emission = Emission::None;
  ForecastInterval interval;
  bool match = false;
};

struct FinishReport {
  std::vector<std::pair<PartitionId, StateId>> final_states;
  std::uint64_t elapsed_incorrect = 0;
  std::uint64_t discarded = 0;
};

class Engine {
 public:
  /// Throws ConfigError when the model was not built for this configuration.
  Engine(EngineConfig config, std::shared_ptr<const Pmc> model, std::shared_ptr<const ForecastTable> table)
      : config_(std::move(config)), model_(std::move(model)), table_(std::move(table)) {
    if (!model_ || !table_) throw ConfigError("engine needs a model and a forecast table");
    const Dfa& dfa = model_->dfa;
    if (!(config_.alphabet == dfa.alphabet)) throw ConfigError("alphabet differs from the model's");
    if (config_.order != dfa.order)
      throw ConfigError("order " + std::to_string(config_.order) + " differs from the model's " +
                        std::to_string(dfa.order));
    if (to_string(parse_pattern(config_.pattern, config_.alphabet)) != dfa.pattern)
      throw ConfigError("pattern differs from the model's ('" + dfa.pattern + "')");
    if (table_->size() != dfa.num_states()) throw ConfigError("forecast table does not match the model");
    dfa_ = &dfa;
    metrics_ = MetricsAccumulator(dfa.num_states());
  }

  EngineOutput process(const Event& ev) {
    if (ev.symbol >= dfa_->num_symbols()) throw UnknownSymbolError("#" + std::to_string(ev.symbol));
    if (ev.partition >= runs_.size()) runs_.resize(ev.partition + 1);
    RunState& run = runs_[ev.partition];
    if (!run.started) {
      run.started = true;
      run.partition = ev.partition;
      ++run_count_;
    } else if (ev.index <= run.last_index) {
      throw StreamError("event index " + std::to_string(ev.index) + " not after " + std::to_string(run.last_index) +
                        " in partition " + std::to_string(ev.partition));
    }
    run.last_index = ev.index;
    const bool scoring = ++consumed_ > config_.warmup_count;

    if (ev.ground_truth >= 0) metrics_.mark_ground_truth();
    const bool label = ev.ground_truth > 0;
    if (dfa_->origin[run.current] == dfa_->origin[Dfa::start()])
      run.label_since_start = label;
    else
      run.label_since_start = run.label_since_start || label;

    const StateId next = dfa_->next(run.current, ev.symbol);
    EngineOutput out{ev.partition, ev.index, ev.symbol, next, Emission::None, {}, false};
    if (dfa_->is_final(next)) {
      out.match = true;
      if (!run.pending.empty()) {
        score_match(run.pending, ev.index, run.label_since_start, metrics_);
        run.pending.clear();
      }
      run.current = dfa_->restart[next];
      return out;
    }
    run.current = next;
    if (!scoring) return out;
    const ForecastEntry& entry = table_->at(next);
    if (entry.kind == EntryKind::Interval) {
      const auto start = static_cast<std::uint32_t>(entry.interval.start);
      const auto end = static_cast<std::uint32_t>(entry.interval.end);
      run.pending.push_back({ev.index, next, start, end});
      metrics_.on_forecast(next, start, end);
      out.emission = Emission::Interval;
      out.interval = entry.interval;
    } else {
      metrics_.on_no_forecast(next);
      out.emission = Emission::NoForecast;
    }
    return out;
  }

  /// End of stream: pending forecasts whose window has fully elapsed are
  /// incorrect, the rest are discarded.
  FinishReport finish() {
    FinishReport rep;
    for (auto& run : runs_) {
      if (!run.started) continue;
      rep.final_states.emplace_back(run.partition, run.current);
      for (const auto& f : run.pending) {
        if (f.issued_at + static_cast<std::int64_t>(f.end) <= run.last_index) {
          metrics_.on_verdict(f.state, Verdict{});
          ++rep.elapsed_incorrect;
        } else {
          metrics_.on_discard(f.state);
          ++rep.discarded;
        }
      }
      run.pending.clear();
    }
    return rep;
  }

  const MetricsAccumulator& metrics() const noexcept { return metrics_; }
  const Dfa& dfa() const noexcept { return *dfa_; }
  const Pmc& model() const noexcept { return *model_; }
  const ForecastTable& table() const noexcept { return *table_; }
  const EngineConfig& config() const noexcept { return config_; }
  std::size_t run_count() const noexcept { return run_count_; }
  std::uint64_t consumed() const noexcept { return consumed_; }

  const RunState* run(PartitionId p) const {
    if (p >= runs_.size() || !runs_[p].started) return nullptr;
    return &runs_[p];
  }

 private:
  EngineConfig config_;
  std::shared_ptr<const Pmc> model_;
  std::shared_ptr<const ForecastTable> table_;
  const Dfa* dfa_ = nullptr;
  std::vector<RunState> runs_;
  std::size_t run_count_ = 0;
  std::uint64_t consumed_ = 0;
  MetricsAccumulator metrics_;
};

}  // namespace pmcast

#endif  // PMCAST_ENGINE_HPP_
