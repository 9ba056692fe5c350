#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pmcast/automata.hpp"

using namespace pmcast;
using fixtures::abc;

namespace {

/// Thompson NFA simulation, used only to check build_nfa on its own.
bool nfa_accepts(const Nfa& nfa, const std::vector<SymbolId>& input) {
  auto closure = [&](std::set<StateId> states) {
    std::vector<StateId> stack(states.begin(), states.end());
    while (!stack.empty()) {
      StateId s = stack.back();
      stack.pop_back();
      for (const auto& e : nfa.edges[s])
        if (e.label == kEpsilonLabel && states.insert(e.to).second) stack.push_back(e.to);
    }
    return states;
  };
  std::set<StateId> cur = closure({nfa.start});
  for (SymbolId x : input) {
    std::set<StateId> next;
    for (StateId s : cur)
      for (const auto& e : nfa.edges[s])
        if (e.label == static_cast<std::int32_t>(x)) next.insert(e.to);
    cur = closure(next);
  }
  for (StateId s : cur)
    if (std::find(nfa.finals.begin(), nfa.finals.end(), s) != nfa.finals.end()) return true;
  return false;
}

std::vector<std::vector<SymbolId>> all_strings(std::size_t r, std::size_t max_len) {
  std::vector<std::vector<SymbolId>> out;
  oracle::for_each_string(r, max_len, [&](const std::vector<SymbolId>& s) { out.push_back(s); });
  return out;
}

}  // namespace

TEST(BuildNfa, SymbolAcceptsExactlyOneString) {
  Alphabet a = abc();
  Nfa nfa = build_nfa(ast::symbol("a"), a);
  EXPECT_EQ(nfa.edges.size(), 2U);
  for (const auto& s : all_strings(3, 3)) EXPECT_EQ(nfa_accepts(nfa, s), s == std::vector<SymbolId>{0});
}

TEST(BuildNfa, EpsilonStartIsFinal) {
  Nfa nfa = build_nfa(ast::epsilon(), abc());
  EXPECT_TRUE(nfa_accepts(nfa, {}));
  EXPECT_FALSE(nfa_accepts(nfa, {0}));
}

TEST(BuildNfa, ConcatAcceptsExactlyAcc) {
  Alphabet a = abc();
  Nfa nfa = build_nfa(parse_pattern("a;c;c", a), a);
  for (const auto& s : all_strings(3, 4)) EXPECT_EQ(nfa_accepts(nfa, s), s == fixtures::symbols(a, "acc"));
}

TEST(BuildNfa, LanguageMatchesInterpreterOnRandomPatterns) {
  Alphabet a = abc();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    PatternAst ast = oracle::random_pattern(rng, a, 4);
    oracle::Program prog(ast, a);
    Nfa nfa = build_nfa(ast, a);
    for (const auto& s : all_strings(3, 5)) {
      oracle::Bits start(s.size());
      start.set(0);
      bool whole = prog.ends(oracle::symbol_masks(s, 0, 3), start).test(s.size());
      ASSERT_EQ(nfa_accepts(nfa, s), whole) << to_string(ast);
    }
  }
}

TEST(PrefixAny, ShapeAndLanguage) {
  Alphabet a = abc();
  PatternAst r = parse_pattern("a;c;c", a);
  EXPECT_EQ(to_string(prefix_any(r, a)), "(a+b+c)*;a;c;c");
  Dfa all = determinize(build_nfa(prefix_any(ast::epsilon(), a), a));
  for (const auto& s : all_strings(3, 4)) EXPECT_TRUE(accepts(all, s));

  Alphabet single({"a"});
  Dfa plus = determinize(build_nfa(prefix_any(ast::symbol("a"), single), single));
  for (const auto& s : all_strings(1, 5)) EXPECT_EQ(accepts(plus, s), !s.empty());
}

TEST(Determinize, RunningExampleHasFourStates) {
  Dfa dfa = fixtures::acc_dfa();
  ASSERT_EQ(dfa.num_states(), 4U);
  EXPECT_EQ(dfa.finals(), std::vector<StateId>{3});
  const SymbolId a = 0, b = 1, c = 2;
  EXPECT_EQ(dfa.next(0, a), 1U);
  EXPECT_EQ(dfa.next(1, c), 2U);
  EXPECT_EQ(dfa.next(2, c), 3U);
  for (StateId q = 0; q < 4; ++q) {
    EXPECT_EQ(dfa.next(q, b), 0U);
    EXPECT_EQ(dfa.next(q, a), 1U);
  }
  EXPECT_EQ(dfa.next(0, c), 0U);
  EXPECT_EQ(dfa.next(3, c), 0U);
}

TEST(Determinize, UniversalLanguageIsOneState) {
  Alphabet a = abc();
  Dfa dfa = determinize(build_nfa(prefix_any(ast::epsilon(), a), a));
  ASSERT_EQ(dfa.num_states(), 1U);
  EXPECT_TRUE(dfa.is_final(0));
  for (SymbolId e = 0; e < 3; ++e) EXPECT_EQ(dfa.next(0, e), 0U);
}

TEST(Determinize, AgreesWithSuffixMatcher) {
  Alphabet a = abc();
  PatternAst r = parse_pattern("a;(a+b)*;c", a);
  Dfa dfa = compile_pattern("a;(a+b)*;c", a, 0);
  oracle::Program prog(r, a);
  for (const auto& s : all_strings(3, 8)) ASSERT_EQ(accepts(dfa, s), oracle::accepts_suffix(prog, s, 3));
}

TEST(Determinize, TotalAndBreadthFirstNumbered) {
  Alphabet a = abc();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    PatternAst r = oracle::random_proper_pattern(rng, a, 4);
    Dfa dfa = compile_pattern(to_string(r), a, 0);
    ASSERT_EQ(dfa.delta.size(), dfa.num_states() * 3);
    // BFS order: the first time each state id appears in the row-major table, ids appear in increasing order
    StateId next_new = 1;
    for (StateId t : dfa.delta) {
      ASSERT_LT(t, dfa.num_states());
      if (t >= next_new) {
        ASSERT_EQ(t, next_new);
        ++next_new;
      }
    }
  }
}

TEST(Disambiguate, SplitsStartStateAtOrderOne) {
  Dfa d1 = fixtures::acc_dfa(1);
  ASSERT_EQ(d1.num_states(), 5U);
  std::map<StateId, std::vector<std::string>> clusters;
  for (StateId q = 0; q < d1.num_states(); ++q) clusters[d1.origin[q]].push_back(state_label(d1, q));
  EXPECT_EQ(clusters[0], (std::vector<std::string>{"0_b", "0_c"}));
  EXPECT_EQ(clusters[1], (std::vector<std::string>{"1_a"}));
  EXPECT_EQ(clusters[2], (std::vector<std::string>{"2_c"}));
  EXPECT_EQ(clusters[3], (std::vector<std::string>{"3_c"}));
}

TEST(Disambiguate, OrderZeroIsIdentity) {
  Dfa d0 = fixtures::acc_dfa();
  Dfa same = disambiguate(d0, 0);
  EXPECT_EQ(same.delta, d0.delta);
  EXPECT_EQ(same.final, d0.final);
  EXPECT_EQ(same.origin, d0.origin);
}

TEST(Disambiguate, OrderTwoSuffixesAreSingletons) {
  Dfa d2 = fixtures::acc_dfa(2);
  auto sets = oracle::suffix_sets(d2, 2, false);
  for (StateId q = 0; q < d2.num_states(); ++q) {
    EXPECT_LE(sets[q].size(), 1U) << state_label(d2, q);
    if (!sets[q].empty()) {
      EXPECT_EQ(*sets[q].begin(), d2.suffix_tag[q]);
    }
  }
}

TEST(Disambiguate, RandomPatternsUnambiguousAndEquivalent) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 25; ++i) {
    Alphabet a = (i % 2) ? Alphabet({"a", "b"}) : abc();
    PatternAst r = oracle::random_proper_pattern(rng, a, 4);
    const std::string text = to_string(r);
    Dfa d0 = compile_pattern(text, a, 0);
    for (std::size_t m : {1U, 2U}) {
      Dfa dm = compile_pattern(text, a, m);
      auto sets = oracle::suffix_sets(dm, m, true);
      for (StateId q = 0; q < dm.num_states(); ++q) {
        ASSERT_LE(sets[q].size(), 1U) << text << " m=" << m << " state " << state_label(dm, q);
        if (!sets[q].empty()) {
          ASSERT_EQ(*sets[q].begin(), dm.suffix_tag[q]);
        }
        ASSERT_LT(dm.origin[q], d0.num_states());
        ASSERT_EQ(dm.is_final(q), d0.is_final(dm.origin[q]));
        for (SymbolId e = 0; e < a.size(); ++e) ASSERT_EQ(dm.origin[dm.next(q, e)], d0.next(dm.origin[q], e));
      }
      oracle::for_each_string(a.size(), 8, [&](const std::vector<SymbolId>& s) {
        ASSERT_EQ(accepts(dm, s), accepts(d0, s)) << text;
      });
    }
  }
}

TEST(Disambiguate, RestartStatesKeepHistory) {
  for (std::size_t m : {1U, 2U}) {
    Dfa d = compile_pattern("a;(a+b)*;c", abc(), m);
    for (StateId f : d.finals()) {
      EXPECT_EQ(d.origin[d.restart[f]], d.origin[Dfa::start()]);
      EXPECT_EQ(d.suffix_tag[d.restart[f]], d.suffix_tag[f]);
    }
  }
}

TEST(Disambiguate, RejectsAlreadyDisambiguatedInput) {
  EXPECT_THROW(disambiguate(fixtures::acc_dfa(1), 2), Error);
}

TEST(ReachingSuffixes, MatchesPathEnumeration) {
  Dfa d0 = compile_pattern("a;(a+b)*;c", abc(), 0);
  auto sets = reaching_suffixes(d0, 2);
  auto oracle_sets = oracle::suffix_sets(d0, 2, false);
  for (StateId q = 0; q < d0.num_states(); ++q) EXPECT_EQ(sets[q], oracle_sets[q]);
}

TEST(Step, Examples) {
  Dfa dfa = fixtures::acc_dfa();
  EXPECT_EQ(step(dfa, 0, "a"), 1U);
  EXPECT_THROW(step(dfa, 0, "d"), UnknownSymbolError);
  EXPECT_THROW(step(dfa, 0, SymbolId{3}), UnknownSymbolError);
  EXPECT_THROW(step(dfa, 9, SymbolId{0}), std::out_of_range);

  std::vector<StateId> visited;
  StateId q = 0;
  for (char c : std::string("bacc")) {
    visited.push_back(q);
    q = step(dfa, q, std::string(1, c));
  }
  EXPECT_EQ(visited, (std::vector<StateId>{0, 0, 1, 2}));
  EXPECT_EQ(q, 3U);

  Dfa all = compile_pattern("", abc(), 0);
  for (SymbolId e = 0; e < 3; ++e) EXPECT_EQ(step(all, 0, e), 0U);
}

TEST(Compile, StateCounts) {
  Alphabet a = abc();
  EXPECT_EQ(compile_pattern("a;c;c", a, 0).num_states(), 4U);
  EXPECT_EQ(compile_pattern("a;c;c", a, 1).num_states(), 5U);
  EXPECT_EQ(compile_pattern("a;b;c", a, 0).num_states(), 4U);
  EXPECT_EQ(compile_pattern("a;(a+b)*;c", a, 0).num_states(), 3U);
}

TEST(Compile, NullablePatternAcceptsEverywhere) {
  Dfa d = compile_pattern("a*", abc(), 1);
  for (StateId q = 0; q < d.num_states(); ++q) EXPECT_TRUE(d.is_final(q));
}

TEST(Compile, NoDeadStates) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    PatternAst r = oracle::random_pattern(rng, abc(), 4);
    EXPECT_NO_THROW(check_no_dead_states(compile_pattern(to_string(r), abc(), 2)));
  }
}

TEST(StateLabel, Format) {
  Dfa d2 = fixtures::acc_dfa(2);
  bool found = false;
  for (StateId q = 0; q < d2.num_states(); ++q)
    if (state_label(d2, q) == "3_c.c") found = true;
  EXPECT_TRUE(found);
  EXPECT_EQ(state_label(fixtures::acc_dfa(), 2), "2");
}
