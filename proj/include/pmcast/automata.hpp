#ifndef PMCAST_AUTOMATA_HPP_
#define PMCAST_AUTOMATA_HPP_

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmcast/error.hpp"
#include "pmcast/pattern.hpp"

namespace pmcast {

using StateId = std::uint32_t;
using Suffix = std::vector<SymbolId>;

inline constexpr std::int32_t kEpsilonLabel = -1;

struct NfaEdge {
  std::int32_t label;  // symbol id, or kEpsilonLabel
  StateId to;
};

struct Nfa {
  Alphabet alphabet;
  std::vector<std::vector<NfaEdge>> edges;  // indexed by state
  StateId start = 0;
  std::vector<StateId> finals;

  std::size_t num_states() const noexcept { return edges.size(); }
};

/// Deterministic automaton over a dense transition table.
///
/// States are 0..num_states()-1, the start state is 0. When order > 0 every
/// state reached by a string of length >= order knows the last `order`
/// symbols read (suffix_tag); origin maps each state to the state of the
/// undisambiguated automaton it copies.
struct Dfa {
  Alphabet alphabet;
  std::string pattern;  // canonical text of R (not of the Σ*·R prefix form)
  std::size_t order = 0;
  std::vector<StateId> delta;  // row-major, num_states × alphabet.size()
  std::vector<std::uint8_t> final;
  std::vector<Suffix> suffix_tag;
  std::vector<StateId> origin;
  /// For final states: the start-cluster copy a run resumes from after a
  /// match. Copies of the start state only differ in the history they
  /// remember, so resuming in the copy whose tag equals the final state's
  /// tag keeps the history exact.
  std::vector<StateId> restart;

  std::size_t num_states() const noexcept { return final.size(); }
  std::size_t num_symbols() const noexcept { return alphabet.size(); }
  static constexpr StateId start() noexcept { return 0; }

  StateId next(StateId state, SymbolId symbol) const noexcept {
    return delta[static_cast<std::size_t>(state) * alphabet.size() + symbol];
  }
  bool is_final(StateId state) const noexcept { return final[state] != 0; }

  std::vector<StateId> finals() const {
    std::vector<StateId> out;
    for (StateId q = 0; q < num_states(); ++q)
      if (is_final(q)) out.push_back(q);
    return out;
  }
};

namespace detail {

struct Fragment {
  StateId start;
  StateId end;
};

class ThompsonBuilder {
 public:
  explicit ThompsonBuilder(Nfa& nfa) : nfa_(nfa) {}

  Fragment build(const PatternNode& node) {
    switch (node.kind) {
      case NodeKind::Epsilon: {
        StateId s = add_state();
        return {s, s};
      }
      case NodeKind::Symbol: {
        StateId s = add_state(), f = add_state();
        link(s, nfa_.alphabet.id(node.symbol), f);
        return {s, f};
      }
      case NodeKind::Union: {
        Fragment l = build(*node.left), r = build(*node.right);
        StateId s = add_state(), f = add_state();
        link(s, kEpsilonLabel, l.start);
        link(s, kEpsilonLabel, r.start);
        link(l.end, kEpsilonLabel, f);
        link(r.end, kEpsilonLabel, f);
        return {s, f};
      }
      case NodeKind::Concat: {
        Fragment l = build(*node.left), r = build(*node.right);
        link(l.end, kEpsilonLabel, r.start);
        return {l.start, r.end};
      }
      case NodeKind::Star: {
        Fragment c = build(*node.left);
        StateId s = add_state(), f = add_state();
        link(s, kEpsilonLabel, c.start);
        link(s, kEpsilonLabel, f);
        link(c.end, kEpsilonLabel, c.start);
        link(c.end, kEpsilonLabel, f);
        return {s, f};
      }
    }
    throw std::logic_error("bad pattern node");
  }

 private:
  StateId add_state() {
    nfa_.edges.emplace_back();
    return static_cast<StateId>(nfa_.edges.size() - 1);
  }
  void link(StateId from, std::int32_t label, StateId to) { nfa_.edges[from].push_back({label, to}); }

  Nfa& nfa_;
};

}  // namespace detail

/// Thompson construction. Throws UnknownSymbolError for symbols outside the alphabet.
inline Nfa build_nfa(const PatternAst& ast, const Alphabet& alphabet) {
  Nfa nfa;
  nfa.alphabet = alphabet;
  detail::ThompsonBuilder builder(nfa);
  detail::Fragment frag = builder.build(*ast);
  nfa.start = frag.start;
  nfa.finals = {frag.end};
  return nfa;
}

/// Σ*·R: Concat(Star(s1 + s2 + ... + sr), R), union nested to the right.
inline PatternAst prefix_any(const PatternAst& ast, const Alphabet& alphabet) {
  const auto& names = alphabet.symbols();
  PatternAst any = ast::symbol(names.back());
  for (std::size_t i = names.size() - 1; i-- > 0;) any = ast::alt(ast::symbol(names[i]), any);
  return ast::concat(ast::star(any), ast);
}

/// Picks, for every final state, the start-cluster state whose tag equals
/// the final state's tag. A short tag (match within the first order-1
/// events) takes the smallest start copy whose tag ends with it; the start
/// state is the last resort.
inline void compute_restart_states(Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  dfa.restart.assign(n, Dfa::start());
  if (n == 0) return;
  std::map<Suffix, StateId> start_copies;
  for (StateId q = 0; q < n; ++q)
    if (dfa.origin[q] == dfa.origin[Dfa::start()]) start_copies.emplace(dfa.suffix_tag[q], q);
  for (StateId q = 0; q < n; ++q) {
    if (!dfa.is_final(q)) continue;
    const Suffix& tag = dfa.suffix_tag[q];
    if (auto it = start_copies.find(tag); it != start_copies.end()) {
      dfa.restart[q] = it->second;
      continue;
    }
    for (const auto& [copy_tag, copy] : start_copies) {
      if (copy_tag.size() >= tag.size() && std::equal(tag.rbegin(), tag.rend(), copy_tag.rbegin())) {
        dfa.restart[q] = copy;
        break;
      }
    }
  }
}

/// Subset construction, breadth-first from the start set with successors
/// visited in alphabet order. Subsets are identified by their kernel: the
/// NFA states that carry a symbol edge or are final. Subsets with equal
/// kernels are indistinguishable, and dropping the pure epsilon-routing
/// states keeps Σ*·R automata free of spurious start-state copies.
inline Dfa determinize(const Nfa& nfa) {
  const std::size_t n_nfa = nfa.num_states();
  const std::size_t n_sym = nfa.alphabet.size();

  std::vector<std::uint8_t> is_final(n_nfa, 0), important(n_nfa, 0);
  for (StateId f : nfa.finals) is_final[f] = 1;
  for (StateId s = 0; s < n_nfa; ++s) {
    important[s] = is_final[s];
    for (const auto& e : nfa.edges[s])
      if (e.label != kEpsilonLabel) important[s] = 1;
  }

  std::vector<std::uint32_t> mark(n_nfa, 0);
  std::uint32_t epoch = 0;
  auto kernel_of_closure = [&](std::vector<StateId> frontier) {
    ++epoch;
    std::vector<StateId> kernel;
    for (StateId s : frontier) mark[s] = epoch;
    while (!frontier.empty()) {
      StateId s = frontier.back();
      frontier.pop_back();
      if (important[s]) kernel.push_back(s);
      for (const auto& e : nfa.edges[s]) {
        if (e.label == kEpsilonLabel && mark[e.to] != epoch) {
          mark[e.to] = epoch;
          frontier.push_back(e.to);
        }
      }
    }
    std::sort(kernel.begin(), kernel.end());
    return kernel;
  };

  Dfa dfa;
  dfa.alphabet = nfa.alphabet;
  std::map<std::vector<StateId>, StateId> ids;
  std::vector<std::vector<StateId>> kernels;
  auto intern = [&](std::vector<StateId> kernel) {
    auto [it, inserted] = ids.emplace(kernel, static_cast<StateId>(kernels.size()));
    if (inserted) {
      bool fin = std::any_of(kernel.begin(), kernel.end(), [&](StateId s) { return is_final[s] != 0; });
      dfa.final.push_back(fin ? 1 : 0);
      kernels.push_back(std::move(kernel));
    }
    return it->second;
  };

  intern(kernel_of_closure({nfa.start}));
  for (std::size_t q = 0; q < kernels.size(); ++q) {
    for (SymbolId sym = 0; sym < n_sym; ++sym) {
      std::vector<StateId> moved;
      for (StateId s : kernels[q])
        for (const auto& e : nfa.edges[s])
          if (e.label == static_cast<std::int32_t>(sym)) moved.push_back(e.to);
      dfa.delta.push_back(intern(kernel_of_closure(std::move(moved))));
    }
  }

  const std::size_t n = kernels.size();
  dfa.suffix_tag.assign(n, Suffix{});
  dfa.origin.resize(n);
  for (StateId q = 0; q < n; ++q) dfa.origin[q] = q;
  compute_restart_states(dfa);
  return dfa;
}

/// Sets of length-`length` suffixes of the strings (of length >= `length`)
/// that reach each state, by forward propagation from the empty suffix.
inline std::vector<std::set<Suffix>> reaching_suffixes(const Dfa& dfa, std::size_t length) {
  const std::size_t n = dfa.num_states();
  std::vector<std::set<Suffix>> current(n, std::set<Suffix>{Suffix{}});
  for (std::size_t k = 1; k <= length; ++k) {
    std::vector<std::set<Suffix>> next(n);
    for (StateId p = 0; p < n; ++p) {
      for (SymbolId e = 0; e < dfa.num_symbols(); ++e) {
        StateId q = dfa.next(p, e);
        for (const Suffix& s : current[p]) {
          Suffix extended = s;
          extended.push_back(e);
          next[q].insert(std::move(extended));
        }
      }
    }
    current = std::move(next);
  }
  return current;
}

/// Splits every state whose last `m` symbols are ambiguous into one copy per
/// feasible length-m suffix; this is the fixed point of repeated duplication.
///
/// The first m-1 events of a stream leave only a partial history. Such a
/// state is mapped onto the smallest full copy whose tag ends with that
/// partial history, or kept as a transient state with a short tag when no
/// full copy fits. Input must be an order-0 automaton; m = 0 returns it
/// unchanged.
inline Dfa disambiguate(const Dfa& dfa, std::size_t m) {
  if (m == 0) return dfa;
  if (dfa.order != 0) throw Error("disambiguate expects an order-0 automaton");

  const std::size_t n_sym = dfa.num_symbols();
  const auto feasible = reaching_suffixes(dfa, m);

  using Key = std::pair<StateId, Suffix>;
  auto resolve = [&](StateId q, Suffix tag) -> Key {
    if (tag.size() >= m) return {q, std::move(tag)};
    for (const Suffix& full : feasible[q])
      if (std::equal(tag.rbegin(), tag.rend(), full.rbegin())) return {q, full};
    return {q, std::move(tag)};
  };

  Dfa out;
  out.alphabet = dfa.alphabet;
  out.pattern = dfa.pattern;
  out.order = m;
  std::map<Key, StateId> ids;
  std::vector<Key> keys;
  auto intern = [&](Key key) {
    auto [it, inserted] = ids.emplace(key, static_cast<StateId>(keys.size()));
    if (inserted) keys.push_back(std::move(key));
    return it->second;
  };

  intern(resolve(Dfa::start(), {}));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto [q, tag] = keys[i];  // copy: intern() may grow keys
    // a run resumes from the start cluster after a match, keeping its history
    if (dfa.final[q]) intern(resolve(Dfa::start(), tag));
    for (SymbolId e = 0; e < n_sym; ++e) {
      Suffix shifted = tag;
      shifted.push_back(e);
      if (shifted.size() > m) shifted.erase(shifted.begin());
      out.delta.push_back(intern(resolve(dfa.next(q, e), std::move(shifted))));
    }
  }

  for (const auto& [q, tag] : keys) {
    out.final.push_back(dfa.final[q]);
    out.suffix_tag.push_back(tag);
    out.origin.push_back(dfa.origin[q]);
  }
  compute_restart_states(out);
  return out;
}

/// Checked single transition. Throws UnknownSymbolError / std::out_of_range.
inline StateId step(const Dfa& dfa, StateId state, SymbolId symbol) {
  if (state >= dfa.num_states()) throw std::out_of_range("invalid DFA state " + std::to_string(state));
  if (symbol >= dfa.num_symbols()) throw UnknownSymbolError("#" + std::to_string(symbol));
  return dfa.next(state, symbol);
}

inline StateId step(const Dfa& dfa, StateId state, std::string_view symbol) {
  return step(dfa, state, dfa.alphabet.id(symbol));
}

/// Whole-string acceptance from the start state, without match resets.
inline bool accepts(const Dfa& dfa, std::span<const SymbolId> input) {
  StateId q = Dfa::start();
  for (SymbolId s : input) q = dfa.next(q, s);
  return dfa.is_final(q);
}

/// Throws when some state cannot reach a final state.
inline void check_no_dead_states(const Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  std::vector<std::vector<StateId>> reverse(n);
  for (StateId p = 0; p < n; ++p)
    for (SymbolId e = 0; e < dfa.num_symbols(); ++e) reverse[dfa.next(p, e)].push_back(p);
  std::vector<std::uint8_t> live(n, 0);
  std::vector<StateId> stack;
  for (StateId q = 0; q < n; ++q)
    if (dfa.is_final(q)) {
      live[q] = 1;
      stack.push_back(q);
    }
  while (!stack.empty()) {
    StateId q = stack.back();
    stack.pop_back();
    for (StateId p : reverse[q])
      if (!live[p]) {
        live[p] = 1;
        stack.push_back(p);
      }
  }
  for (StateId q = 0; q < n; ++q)
    if (!live[q]) throw std::logic_error("dead state " + std::to_string(q) + " in Σ*·R automaton");
}

/// Pattern text to the m-unambiguous automaton for Σ*·R.
inline Dfa compile_pattern(std::string_view text, const Alphabet& alphabet, std::size_t m) {
  PatternAst r = parse_pattern(text, alphabet);
  Dfa dfa = determinize(build_nfa(prefix_any(r, alphabet), alphabet));
  dfa.pattern = to_string(r);
  check_no_dead_states(dfa);
  return disambiguate(dfa, m);
}

/// Human-readable state label such as "0" or "0_b" or "3_ab".
inline std::string state_label(const Dfa& dfa, StateId q) {
  std::string label = std::to_string(dfa.origin[q]);
  if (!dfa.suffix_tag[q].empty()) {
    label += '_';
    for (std::size_t i = 0; i < dfa.suffix_tag[q].size(); ++i) {
      if (i) label += '.';
      label += dfa.alphabet.name(dfa.suffix_tag[q][i]);
    }
  }
  return label;
}

}  // namespace pmcast

#endif  // PMCAST_AUTOMATA_HPP_
