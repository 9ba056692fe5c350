#ifndef PMCAST_FORECAST_HPP_
#define PMCAST_FORECAST_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/error.hpp"
#include "pmcast/model_io.hpp"
#include "pmcast/pmc.hpp"

namespace pmcast {

/// Slack for comparisons between interval probabilities and against the
/// threshold. Sums of the same masses in different orders differ by a few
/// ulps; anything inside this band counts as equal.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Interval of future event counts [start, end], both 1-based and inclusive.
struct ForecastInterval {
  std::size_t start = 1;
  std::size_t end = 1;
  double probability = 0.0;

  std::size_t spread() const noexcept { return end - start; }
  friend bool operator==(const ForecastInterval&, const ForecastInterval&) = default;
};

inline double interval_probability(const WaitingTimeDistribution& dist, std::size_t start, std::size_t end) {
  if (start < 1 || start > end || end > dist.horizon())
    throw Error("interval [" + std::to_string(start) + "," + std::to_string(end) + "] outside [1," +
                std::to_string(dist.horizon()) + "]");
  double sum = 0.0;
  for (std::size_t n = start; n <= end; ++n) sum += dist.probs[n - 1];
  return sum;
}

/// Smallest-spread interval with probability >= p_fc; among those, the
/// highest probability, and among intervals within tolerance of that
/// maximum, the earliest start. std::nullopt when nothing qualifies or the
/// smallest spread exceeds max_spread.
///
/// Linear time: a two-pointer sweep finds the smallest spread (the window
/// end advances and the start is pulled forward while the window still
/// carries p_fc), then one sliding pass over windows of that width picks the
/// winner.
inline std::optional<ForecastInterval> best_interval(const WaitingTimeDistribution& dist, double p_fc,
                                                     std::optional<std::size_t> max_spread = std::nullopt) {
  if (!(p_fc > 0.0 && p_fc <= 1.0)) throw Error("forecast threshold must lie in (0,1]");
  const double need = p_fc - kProbabilityTolerance;
  const auto& p = dist.probs;

  std::optional<std::size_t> spread;
  double mass = 0.0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < p.size(); ++hi) {
    mass += p[hi];
    while (lo < hi && mass - p[lo] >= need) mass -= p[lo++];
    if (mass >= need && (!spread || hi - lo < *spread)) spread = hi - lo;
  }
  if (!spread || (max_spread && *spread > *max_spread)) return std::nullopt;

  const std::size_t width = *spread + 1;
  std::vector<double> window(p.size() - width + 1);
  mass = 0.0;
  for (std::size_t n = 0; n < width; ++n) mass += p[n];
  window[0] = mass;
  for (std::size_t s = 1; s < window.size(); ++s) {
    mass += p[s + width - 1] - p[s - 1];
    window[s] = mass;
  }
  double top = -1.0;
  for (double w : window)
    if (w >= need) top = std::max(top, w);
  std::size_t s = 0;
  while (window[s] < need || window[s] < top - kProbabilityTolerance) ++s;
  ForecastInterval best{s + 1, s + width, 0.0};
  best.probability = interval_probability(dist, best.start, best.end);
  return best;
}

enum class EntryKind : std::uint8_t { Final, Interval, NoForecast };

struct ForecastEntry {
  EntryKind kind = EntryKind::NoForecast;
  ForecastInterval interval;
};

struct ForecastSettings {
  double p_fc = 0.5;
  std::optional<std::size_t> max_spread;
  std::size_t horizon_cap = kDefaultHorizonCap;
  double horizon_mass = kDefaultHorizonMass;
};

/// Per-state lookup table of best intervals, fixed after construction.
struct ForecastTable {
  ForecastSettings settings;
  std::vector<ForecastEntry> entries;  // indexed by state id

  const ForecastEntry& at(StateId q) const { return entries[q]; }
  std::size_t size() const noexcept { return entries.size(); }
};

/// Table from precomputed distributions (indexed by state id); lets a
/// threshold sweep reuse one set of distributions.
inline ForecastTable build_forecast_table(const Dfa& dfa, const std::vector<WaitingTimeDistribution>& dists,
                                          const ForecastSettings& settings) {
  if (dists.size() != dfa.num_states()) throw Error("distribution count does not match automaton");
  ForecastTable table{settings, std::vector<ForecastEntry>(dfa.num_states())};
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    if (dfa.is_final(q)) {
      table.entries[q].kind = EntryKind::Final;
      continue;
    }
    if (auto iv = best_interval(dists[q], settings.p_fc, settings.max_spread)) {
      table.entries[q] = {EntryKind::Interval, *iv};
    }
  }
  return table;
}

inline ForecastTable build_forecast_table(const Pmc& pmc, const ForecastSettings& settings) {
  return build_forecast_table(pmc.dfa, waiting_times(pmc, settings.horizon_cap, settings.horizon_mass), settings);
}

/// CSV export: state,label,start,end,probability. NO_FORECAST / FINAL in
/// the start column for states without an interval.
inline void write_forecast_table(std::ostream& out, const Dfa& dfa, const ForecastTable& table) {
  out << "state,label,start,end,probability\n";
  for (StateId q = 0; q < table.size(); ++q) {
    const auto& entry = table.at(q);
    out << q << ',' << state_label(dfa, q) << ',';
    switch (entry.kind) {
      case EntryKind::Final: out << "FINAL,,\n"; break;
      case EntryKind::NoForecast: out << "NO_FORECAST,,\n"; break;
      case EntryKind::Interval:
        out << entry.interval.start << ',' << entry.interval.end << ','
            << format_double(entry.interval.probability) << '\n';
        break;
    }
  }
}

}  // namespace pmcast

#endif  // PMCAST_FORECAST_HPP_
