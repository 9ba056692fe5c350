#ifndef PMCAST_METRICS_HPP_
#define PMCAST_METRICS_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/forecast.hpp"
#include "pmcast/model_io.hpp"

namespace pmcast {

/// A forecast waiting for the next match of its run.
struct PendingForecast {
  std::int64_t issued_at = 0;
  StateId state = 0;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
};

struct Verdict {
  bool correct = false;
  bool correct_gt = false;
};

struct StateStats {
  StateId state = 0;
  std::uint64_t issued = 0;
  std::uint64_t correct = 0;
  std::uint64_t correct_gt = 0;
  std::uint64_t incorrect = 0;
  std::uint64_t discarded = 0;  // window still open at end of stream
  std::uint64_t no_forecast = 0;
  std::uint64_t sum_spread = 0;
  std::uint64_t sum_distance = 0;

  std::uint64_t scored() const noexcept { return correct + incorrect; }

  StateStats& operator+=(const StateStats& o) {
    issued += o.issued;
    correct += o.correct;
    correct_gt += o.correct_gt;
    incorrect += o.incorrect;
    discarded += o.discarded;
    no_forecast += o.no_forecast;
    sum_spread += o.sum_spread;
    sum_distance += o.sum_distance;
    return *this;
  }
};

/// Distance between issuance (now = 0) and the earliest forecast completion.
inline std::size_t distance_of(const ForecastInterval& interval) noexcept { return interval.start; }

/// Per-state counters for one engine; accumulators of sharded engines merge
/// by addition.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::size_t num_states = 0) : stats_(num_states) {
    for (StateId q = 0; q < num_states; ++q) stats_[q].state = q;
  }

  void on_forecast(StateId q, std::uint32_t start, std::uint32_t end) {
    auto& s = stats_[q];
    ++s.issued;
    s.sum_spread += end - start;
    s.sum_distance += start;
  }
  void on_no_forecast(StateId q) { ++stats_[q].no_forecast; }
  void on_discard(StateId q) { ++stats_[q].discarded; }
  void on_verdict(StateId q, const Verdict& v) {
    auto& s = stats_[q];
    if (v.correct) {
      ++s.correct;
      if (v.correct_gt) ++s.correct_gt;
    } else {
      ++s.incorrect;
    }
  }
  void mark_ground_truth() noexcept { ground_truth_seen_ = true; }

  void merge(const MetricsAccumulator& other) {
    if (other.stats_.size() != stats_.size()) throw Error("cannot merge accumulators of different automata");
    for (std::size_t q = 0; q < stats_.size(); ++q) stats_[q] += other.stats_[q];
    ground_truth_seen_ = ground_truth_seen_ || other.ground_truth_seen_;
  }

  const std::vector<StateStats>& stats() const noexcept { return stats_; }
  bool ground_truth_seen() const noexcept { return ground_truth_seen_; }

 private:
  std::vector<StateStats> stats_;
  bool ground_truth_seen_ = false;
};

/// Scores every pending forecast against a match at `match_index`: correct
/// iff issued_at + start <= match_index <= issued_at + end. A correct
/// forecast is ground-truth-correct when the match is labelled true.
inline std::vector<Verdict> score_match(std::span<const PendingForecast> pending, std::int64_t match_index,
                                        bool ground_truth_label, MetricsAccumulator& acc) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(pending.size());
  for (const auto& f : pending) {
    const std::int64_t lag = match_index - f.issued_at;
    Verdict v;
    v.correct = lag >= static_cast<std::int64_t>(f.start) && lag <= static_cast<std::int64_t>(f.end);
    v.correct_gt = v.correct && ground_truth_label;
    acc.on_verdict(f.state, v);
    verdicts.push_back(v);
  }
  return verdicts;
}

struct StateReport {
  StateStats stats;
  StateId origin = 0;
  std::string label;
  std::optional<double> precision;
  std::optional<double> precision_gt;
  std::optional<double> mean_spread;
  std::optional<double> mean_distance;
  bool dead_zone = false;  // issued nothing
};

struct MetricsReport {
  std::vector<StateReport> states;  // non-final states, grouped by origin
  StateStats total;
  std::optional<double> precision;
  std::optional<double> precision_gt;
  std::optional<double> mean_spread;             // forecast-weighted
  std::optional<double> mean_distance;           // forecast-weighted
  std::optional<double> state_mean_spread;       // mean of per-state means
  std::optional<double> state_mean_distance;
};

namespace detail {

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

/// Pools counts over states: aggregate precision is total correct over
/// total scored, not a mean of per-state precisions.
inline MetricsReport report(const MetricsAccumulator& acc, const Dfa& dfa) {
  MetricsReport rep;
  rep.total.state = 0;
  double spread_sum = 0.0, distance_sum = 0.0;
  std::size_t active = 0;
  for (const auto& s : acc.stats()) {
    if (dfa.is_final(s.state)) continue;
    StateReport row;
    row.stats = s;
    row.origin = dfa.origin[s.state];
    row.label = state_label(dfa, s.state);
    row.precision = detail::ratio(s.correct, s.scored());
    if (acc.ground_truth_seen()) row.precision_gt = detail::ratio(s.correct_gt, s.scored());
    row.mean_spread = detail::ratio(s.sum_spread, s.issued);
    row.mean_distance = detail::ratio(s.sum_distance, s.issued);
    row.dead_zone = s.issued == 0;
    if (!row.dead_zone) {
      spread_sum += *row.mean_spread;
      distance_sum += *row.mean_distance;
      ++active;
    }
    rep.total += s;
    rep.states.push_back(std::move(row));
  }
  std::stable_sort(rep.states.begin(), rep.states.end(),
                   [](const StateReport& a, const StateReport& b) { return a.origin < b.origin; });
  rep.precision = detail::ratio(rep.total.correct, rep.total.scored());
  if (acc.ground_truth_seen()) rep.precision_gt = detail::ratio(rep.total.correct_gt, rep.total.scored());
  rep.mean_spread = detail::ratio(rep.total.sum_spread, rep.total.issued);
  rep.mean_distance = detail::ratio(rep.total.sum_distance, rep.total.issued);
  if (active > 0) {
    rep.state_mean_spread = spread_sum / static_cast<double>(active);
    rep.state_mean_distance = distance_sum / static_cast<double>(active);
  }
  return rep;
}

namespace detail {

inline std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "N/A"; }

}  // namespace detail

inline void write_report_header(std::ostream& out) { out << "p_fc,state,label,origin,metric,value\n"; }

/// Long-format rows: one per (state, metric), then the ALL aggregate rows.
inline void write_report_rows(std::ostream& out, const MetricsReport& rep, double p_fc) {
  const std::string pf = format_double(p_fc);
  auto row = [&](const std::string& state, const std::string& label, const std::string& origin,
                 const char* metric, const std::string& value) {
    out << pf << ',' << state << ',' << label << ',' << origin << ',' << metric << ',' << value << '\n';
  };
  auto counts = [&](const std::string& st, const std::string& label, const std::string& origin,
                    const StateStats& s) {
    row(st, label, origin, "issued", std::to_string(s.issued));
    row(st, label, origin, "correct", std::to_string(s.correct));
    row(st, label, origin, "correct_gt", std::to_string(s.correct_gt));
    row(st, label, origin, "incorrect", std::to_string(s.incorrect));
    row(st, label, origin, "discarded", std::to_string(s.discarded));
    row(st, label, origin, "no_forecast", std::to_string(s.no_forecast));
  };
  for (const auto& s : rep.states) {
    const std::string st = std::to_string(s.stats.state), origin = std::to_string(s.origin);
    counts(st, s.label, origin, s.stats);
    row(st, s.label, origin, "precision", detail::fmt_opt(s.precision));
    row(st, s.label, origin, "precision_gt", detail::fmt_opt(s.precision_gt));
    row(st, s.label, origin, "spread", detail::fmt_opt(s.mean_spread));
    row(st, s.label, origin, "distance", detail::fmt_opt(s.mean_distance));
    row(st, s.label, origin, "dead_zone", s.dead_zone ? "1" : "0");
  }
  counts("ALL", "ALL", "ALL", rep.total);
  row("ALL", "ALL", "ALL", "precision", detail::fmt_opt(rep.precision));
  row("ALL", "ALL", "ALL", "precision_gt", detail::fmt_opt(rep.precision_gt));
  row("ALL", "ALL", "ALL", "spread", detail::fmt_opt(rep.mean_spread));
  row("ALL", "ALL", "ALL", "distance", detail::fmt_opt(rep.mean_distance));
  row("ALL", "ALL", "ALL", "state_spread", detail::fmt_opt(rep.state_mean_spread));
  row("ALL", "ALL", "ALL", "state_distance", detail::fmt_opt(rep.state_mean_distance));
}

}  // namespace pmcast

#endif  // PMCAST_METRICS_HPP_
