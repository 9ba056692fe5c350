#ifndef PMCAST_PMC_HPP_
#define PMCAST_PMC_HPP_

// Pattern Markov Chain: the automaton's state sequence viewed as a
// first-order Markov chain, with final states made absorbing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/error.hpp"
#include "pmcast/event.hpp"

namespace pmcast {

inline constexpr double kRowSumTolerance = 1e-9;

/// Visit and transition tallies gathered while replaying a stream prefix.
struct CountMatrix {
  std::vector<std::uint64_t> visits;
  std::vector<std::map<StateId, std::uint64_t>> transitions;
  std::vector<StateId> last_states;  // one per partition seen
  std::uint64_t events = 0;

  explicit CountMatrix(std::size_t num_states = 0) : visits(num_states, 0), transitions(num_states) {}

  std::uint64_t count(StateId from, StateId to) const {
    auto it = transitions[from].find(to);
    return it == transitions[from].end() ? 0 : it->second;
  }

  std::uint64_t outgoing(StateId from) const {
    std::uint64_t total = 0;
    for (const auto& [to, n] : transitions[from]) total += n;
    return total;
  }
};

/// Replays the first `count` events through the automaton with match
/// resets, counting visits and transitions per partition run. The initial
/// visit of each run to the start state is counted.
inline CountMatrix warm_up(const Dfa& dfa, std::span<const Event> stream, std::size_t count) {
  if (count > stream.size())
    throw StreamError("warm-up needs " + std::to_string(count) + " events, stream has " +
                      std::to_string(stream.size()));
  CountMatrix counts(dfa.num_states());
  std::vector<StateId> current;
  std::vector<std::uint8_t> seen;
  for (const Event& ev : stream.first(count)) {
    if (ev.symbol >= dfa.num_symbols()) throw UnknownSymbolError("#" + std::to_string(ev.symbol));
    if (ev.partition >= current.size()) {
      current.resize(ev.partition + 1, Dfa::start());
      seen.resize(ev.partition + 1, 0);
    }
    StateId& state = current[ev.partition];
    if (!seen[ev.partition]) {
      seen[ev.partition] = 1;
      ++counts.visits[state];
    }
    StateId from = dfa.is_final(state) ? dfa.restart[state] : state;
    StateId to = dfa.next(from, ev.symbol);
    ++counts.transitions[state][to];
    ++counts.visits[to];
    state = to;
    ++counts.events;
  }
  for (std::size_t p = 0; p < current.size(); ++p)
    if (seen[p]) counts.last_states.push_back(current[p]);
  return counts;
}

inline CountMatrix warm_up(const Dfa& dfa, std::span<const SymbolId> symbols, std::size_t count) {
  std::vector<SymbolId> prefix(symbols.begin(), symbols.begin() + std::min(count, symbols.size()));
  if (count > symbols.size())
    throw StreamError("warm-up needs " + std::to_string(count) + " events, stream has " +
                      std::to_string(symbols.size()));
  auto events = make_events(prefix);
  return warm_up(dfa, std::span<const Event>(events), count);
}

struct PmcEntry {
  StateId to;
  double p;
};

struct Pmc {
  Dfa dfa;
  std::vector<std::vector<PmcEntry>> rows;  // sparse Π, sorted by column
  std::vector<StateId> nonfinal;            // row order of N
  std::vector<StateId> absorbing;           // row order of the identity block
  std::uint64_t warmup_count = 0;
  double smoothing = 0.0;

  std::size_t num_states() const noexcept { return rows.size(); }

  double prob(StateId from, StateId to) const {
    for (const auto& e : rows[from])
      if (e.to == to) return e.p;
    return 0.0;
  }
};

/// Distinct successor states of `state`, ascending.
inline std::vector<StateId> successors(const Dfa& dfa, StateId state) {
  std::vector<StateId> out;
  for (SymbolId e = 0; e < dfa.num_symbols(); ++e) out.push_back(dfa.next(state, e));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

inline void assign_partition(Pmc& pmc) {
  pmc.nonfinal.clear();
  pmc.absorbing.clear();
  for (StateId q = 0; q < pmc.dfa.num_states(); ++q)
    (pmc.dfa.is_final(q) ? pmc.absorbing : pmc.nonfinal).push_back(q);
}

inline void normalize_row(std::vector<PmcEntry>& row) {
  double sum = 0.0;
  for (const auto& e : row) sum += e.p;
  if (sum > 0.0)
    for (auto& e : row) e.p /= sum;
}

}  // namespace detail

/// Maximum-likelihood transition matrix with optional additive smoothing.
///
/// Rows of final states are absorbing whatever was counted. A non-final row
/// with no observed transitions (and no smoothing) is uniform over its
/// structural successors.
inline Pmc estimate_matrix(const CountMatrix& counts, const Dfa& dfa, double smoothing = 0.0) {
  if (smoothing < 0.0) throw Error("smoothing must be non-negative");
  if (counts.visits.size() != dfa.num_states()) throw Error("count matrix does not match automaton");
  Pmc pmc;
  pmc.dfa = dfa;
  pmc.smoothing = smoothing;
  pmc.warmup_count = counts.events;
  pmc.rows.resize(dfa.num_states());
  for (StateId i = 0; i < dfa.num_states(); ++i) {
    auto& row = pmc.rows[i];
    if (dfa.is_final(i)) {
      row.push_back({i, 1.0});
      continue;
    }
    const auto succ = successors(dfa, i);
    double total = 0.0;
    for (StateId j : succ) total += static_cast<double>(counts.count(i, j));
    const double denom = total + smoothing * static_cast<double>(succ.size());
    for (StateId j : succ) {
      double p = denom > 0.0 ? (static_cast<double>(counts.count(i, j)) + smoothing) / denom
                             : 1.0 / static_cast<double>(succ.size());
      if (p > 0.0) row.push_back({j, p});
    }
    detail::normalize_row(row);
  }
  detail::assign_partition(pmc);
  return pmc;
}

/// Builds the chain induced by a next-symbol model: each non-final state q
/// moves along edge e with probability model(suffix_tag(q))[e]. With an
/// order-0 model this is the i.i.d. chain Π(p,q) = Σ_{δ(p,e)=q} P(e).
inline Pmc pmc_from_symbol_model(const Dfa& dfa,
                                 const std::function<std::vector<double>(const Suffix&)>& model) {
  Pmc pmc;
  pmc.dfa = dfa;
  pmc.rows.resize(dfa.num_states());
  for (StateId i = 0; i < dfa.num_states(); ++i) {
    auto& row = pmc.rows[i];
    if (dfa.is_final(i)) {
      row.push_back({i, 1.0});
      continue;
    }
    const auto probs = model(dfa.suffix_tag[i]);
    if (probs.size() != dfa.num_symbols()) throw Error("symbol model has wrong arity");
    std::map<StateId, double> acc;
    for (SymbolId e = 0; e < dfa.num_symbols(); ++e) acc[dfa.next(i, e)] += probs[e];
    for (const auto& [j, p] : acc)
      if (p > 0.0) row.push_back({j, p});
  }
  detail::assign_partition(pmc);
  return pmc;
}

inline Pmc pmc_from_symbol_probabilities(const Dfa& dfa, std::vector<double> probs) {
  return pmc_from_symbol_model(dfa, [probs = std::move(probs)](const Suffix&) { return probs; });
}

/// Throws ModelError on any broken chain invariant.
inline void validate_pmc(const Pmc& pmc) {
  const Dfa& dfa = pmc.dfa;
  if (pmc.rows.size() != dfa.num_states()) throw ModelError("transition matrix has wrong row count");
  for (StateId i = 0; i < pmc.rows.size(); ++i) {
    double sum = 0.0;
    const auto succ = successors(dfa, i);
    for (const auto& e : pmc.rows[i]) {
      if (e.to >= dfa.num_states()) throw ModelError("row " + std::to_string(i) + " has an invalid column");
      if (!(e.p >= 0.0) || e.p > 1.0 + kRowSumTolerance)
        throw ModelError("row " + std::to_string(i) + " has an invalid probability");
      if (dfa.is_final(i)) {
        if (e.to != i && e.p != 0.0) throw ModelError("final state " + std::to_string(i) + " is not absorbing");
      } else if (e.p > 0.0 && !std::binary_search(succ.begin(), succ.end(), e.to)) {
        throw ModelError("row " + std::to_string(i) + " has mass on a non-edge");
      }
      sum += e.p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw ModelError("row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Π reorganized as [[N, C], [0, I]]: non-final states first.
struct AbsorbingPartition {
  std::vector<StateId> nonfinal;
  std::vector<StateId> absorbing;
  DenseMatrix n;  // (l-k) × (l-k)
  DenseMatrix c;  // (l-k) × k
};

inline AbsorbingPartition absorbing_partition(const Pmc& pmc) {
  AbsorbingPartition part{pmc.nonfinal, pmc.absorbing, DenseMatrix(pmc.nonfinal.size(), pmc.nonfinal.size()),
                          DenseMatrix(pmc.nonfinal.size(), pmc.absorbing.size())};
  std::vector<std::size_t> column(pmc.num_states());
  for (std::size_t k = 0; k < pmc.nonfinal.size(); ++k) column[pmc.nonfinal[k]] = k;
  for (std::size_t k = 0; k < pmc.absorbing.size(); ++k) column[pmc.absorbing[k]] = k;
  for (std::size_t r = 0; r < pmc.nonfinal.size(); ++r) {
    for (const auto& e : pmc.rows[pmc.nonfinal[r]]) {
      if (pmc.dfa.is_final(e.to))
        part.c(r, column[e.to]) += e.p;
      else
        part.n(r, column[e.to]) += e.p;
    }
  }
  return part;
}

/// P(W(q) = n) for n = 1..horizon, plus the mass beyond the horizon.
struct WaitingTimeDistribution {
  StateId state = 0;
  std::vector<double> probs;  // probs[n-1] = P(W = n)
  double tail = 0.0;

  std::size_t horizon() const noexcept { return probs.size(); }
  double at(std::size_t n) const { return probs.at(n - 1); }
};

inline constexpr double kDefaultHorizonMass = 0.9999;
inline constexpr std::size_t kDefaultHorizonCap = 200;

namespace detail {

inline double clamp_tail(double tail) { return tail < 0.0 ? 0.0 : tail; }

// Row-vector recurrence v_1 = ξ_q, v_n = v_{n-1} N, p[n] = v_n (I - N) 1,
// where (I - N) 1 is the per-row mass flowing into absorbing states.
inline WaitingTimeDistribution waiting_time_impl(const Pmc& pmc, StateId state, std::size_t horizon,
                                                 double stop_mass) {
  if (horizon == 0) throw Error("waiting-time horizon must be positive");
  if (state >= pmc.num_states()) throw Error("invalid state " + std::to_string(state));
  if (pmc.dfa.is_final(state)) throw Error("waiting time is defined for non-final states only");

  const std::size_t l = pmc.nonfinal.size();
  std::vector<std::int64_t> pos(pmc.num_states(), -1);
  for (std::size_t k = 0; k < l; ++k) pos[pmc.nonfinal[k]] = static_cast<std::int64_t>(k);
  std::vector<double> exit(l, 0.0);
  for (std::size_t k = 0; k < l; ++k)
    for (const auto& e : pmc.rows[pmc.nonfinal[k]])
      if (pmc.dfa.is_final(e.to)) exit[k] += e.p;

  WaitingTimeDistribution dist;
  dist.state = state;
  std::vector<double> v(l, 0.0), next(l, 0.0);
  v[static_cast<std::size_t>(pos[state])] = 1.0;
  double cumulative = 0.0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    double p = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t k = 0; k < l; ++k) {
      const double vk = v[k];
      if (vk == 0.0) continue;
      p += vk * exit[k];
      for (const auto& e : pmc.rows[pmc.nonfinal[k]]) {
        auto j = pos[e.to];
        if (j >= 0) next[static_cast<std::size_t>(j)] += vk * e.p;
      }
    }
    dist.probs.push_back(p);
    cumulative += p;
    v.swap(next);
    if (cumulative >= stop_mass) break;
  }
  dist.tail = clamp_tail(1.0 - cumulative);
  return dist;
}

}  // namespace detail

/// Waiting-time distribution of a non-final state over exactly `horizon` points.
inline WaitingTimeDistribution waiting_time(const Pmc& pmc, StateId state, std::size_t horizon) {
  return detail::waiting_time_impl(pmc, state, horizon, 2.0);
}

/// Truncates at the first n <= horizon_cap whose cumulative mass reaches
/// `mass`; otherwise stops at horizon_cap with the rest reported as tail.
inline WaitingTimeDistribution waiting_time_auto(const Pmc& pmc, StateId state,
                                                 std::size_t horizon_cap = kDefaultHorizonCap,
                                                 double mass = kDefaultHorizonMass) {
  return detail::waiting_time_impl(pmc, state, horizon_cap, mass);
}

/// All non-final distributions at once via the column recurrence
/// u_1 = (I - N) 1, u_n = N u_{n-1}, P(W(q) = n) = u_n[q]. Indexed by state
/// id; entries for final states are empty. Truncation as in waiting_time_auto.
inline std::vector<WaitingTimeDistribution> waiting_times(const Pmc& pmc,
                                                          std::size_t horizon_cap = kDefaultHorizonCap,
                                                          double mass = kDefaultHorizonMass) {
  if (horizon_cap == 0) throw Error("waiting-time horizon must be positive");
  const std::size_t l = pmc.nonfinal.size();
  std::vector<std::int64_t> pos(pmc.num_states(), -1);
  for (std::size_t k = 0; k < l; ++k) pos[pmc.nonfinal[k]] = static_cast<std::int64_t>(k);

  std::vector<double> u(l, 0.0), next(l, 0.0);
  for (std::size_t k = 0; k < l; ++k)
    for (const auto& e : pmc.rows[pmc.nonfinal[k]])
      if (pmc.dfa.is_final(e.to)) u[k] += e.p;

  std::vector<WaitingTimeDistribution> out(pmc.num_states());
  std::vector<double> cumulative(l, 0.0);
  std::vector<std::uint8_t> done(l, 0);
  std::size_t remaining = l;
  for (std::size_t k = 0; k < l; ++k) out[pmc.nonfinal[k]].state = pmc.nonfinal[k];
  for (std::size_t n = 1; n <= horizon_cap && remaining > 0; ++n) {
    for (std::size_t k = 0; k < l; ++k) {
      if (done[k]) continue;
      out[pmc.nonfinal[k]].probs.push_back(u[k]);
      cumulative[k] += u[k];
      if (cumulative[k] >= mass) {
        done[k] = 1;
        --remaining;
      }
    }
    for (std::size_t k = 0; k < l; ++k) {
      double s = 0.0;
      for (const auto& e : pmc.rows[pmc.nonfinal[k]]) {
        auto j = pos[e.to];
        if (j >= 0) s += e.p * u[static_cast<std::size_t>(j)];
      }
      next[k] = s;
    }
    u.swap(next);
  }
  for (std::size_t k = 0; k < l; ++k) out[pmc.nonfinal[k]].tail = detail::clamp_tail(1.0 - cumulative[k]);
  return out;
}

}  // namespace pmcast

#endif  // PMCAST_PMC_HPP_
