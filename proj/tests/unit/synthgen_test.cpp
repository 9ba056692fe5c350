#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pmcast/synthgen.hpp"

using namespace pmcast;

namespace {

GeneratorSpec first_order_spec(std::size_t length, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.alphabet = fixtures::abc();
  spec.order = 1;
  spec.table = {{{0}, {0.1, 0.6, 0.3}}, {{1}, {0.2, 0.2, 0.6}}, {{2}, {0.7, 0.15, 0.15}}};
  spec.seed = seed;
  spec.length = length;
  return spec;
}

std::vector<std::vector<double>> conditionals(const std::vector<SymbolId>& s, std::size_t r) {
  std::vector<std::vector<double>> counts(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 1; i < s.size(); ++i) counts[s[i - 1]][s[i]] += 1;
  for (auto& row : counts) {
    double total = 0.0;
    for (double c : row) total += c;
    for (double& c : row) c /= total;
  }
  return counts;
}

}  // namespace

TEST(Synthgen, Degenerate) {
  GeneratorSpec spec{fixtures::abc(), 0, {{Suffix{}, {1.0, 0.0, 0.0}}}, 1, 50};
  for (SymbolId s : generate_symbols(spec)) EXPECT_EQ(s, 0);
  GeneratorSpec last{fixtures::abc(), 0, {{Suffix{}, {0.0, 0.0, 1.0}}}, 1, 50};
  for (SymbolId s : generate_symbols(last)) EXPECT_EQ(s, 2);
}

TEST(Synthgen, UniformFrequencies) {
  GeneratorSpec spec{fixtures::abc(), 0, {{Suffix{}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}}, 99, 100000};
  std::vector<double> freq(3, 0.0);
  for (SymbolId s : generate_symbols(spec)) freq[s] += 1.0 / 100000;
  for (double f : freq) EXPECT_NEAR(f, 1.0 / 3, 0.01);
}

TEST(Synthgen, Deterministic) {
  auto spec = first_order_spec(5000, 42);
  EXPECT_EQ(generate_symbols(spec), generate_symbols(spec));
  auto other = spec;
  other.seed = 43;
  EXPECT_NE(generate_symbols(spec), generate_symbols(other));
}

TEST(Synthgen, EventsAreSequential) {
  auto events = generate(first_order_spec(100, 1));
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].index, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(events[i].partition, 0U);
    EXPECT_EQ(events[i].ground_truth, -1);
  }
}

TEST(Synthgen, FirstOrderConditionals) {
  auto spec = first_order_spec(100000, 7);
  auto cond = conditionals(generate_symbols(spec), 3);
  for (SymbolId a = 0; a < 3; ++a)
    for (SymbolId b = 0; b < 3; ++b) EXPECT_NEAR(cond[a][b], spec.table.at({a})[b], 0.02);
}

TEST(Synthgen, SecondOrderConditionals) {
  GeneratorSpec spec;
  spec.alphabet = Alphabet({"x", "y"});
  spec.order = 2;
  spec.table = {{{0, 0}, {0.9, 0.1}}, {{0, 1}, {0.3, 0.7}}, {{1, 0}, {0.5, 0.5}}, {{1, 1}, {0.05, 0.95}}};
  spec.seed = 3;
  spec.length = 100000;
  auto s = generate_symbols(spec);
  std::map<Suffix, std::vector<double>> counts;
  for (std::size_t i = 2; i < s.size(); ++i) {
    auto& row = counts[{s[i - 2], s[i - 1]}];
    row.resize(2, 0.0);
    row[s[i]] += 1;
  }
  for (auto& [ctx, row] : counts) {
    const double total = row[0] + row[1];
    if (total < 1000) continue;
    for (SymbolId e = 0; e < 2; ++e) EXPECT_NEAR(row[e] / total, spec.table.at(ctx)[e], 0.02);
  }
}

TEST(Synthgen, PartitionedSingleKeyEqualsGenerate) {
  auto spec = first_order_spec(3000, 11);
  PartitionRegistry reg;
  auto part = generate_partitioned(spec, {"k"}, 5, reg);
  auto plain = generate(spec);
  ASSERT_EQ(part.size(), plain.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    EXPECT_EQ(part[i].symbol, plain[i].symbol);
    EXPECT_EQ(part[i].index, plain[i].index);
    EXPECT_EQ(reg.name(part[i].partition), "k");
  }
}

TEST(Synthgen, PartitionedProjectionsAreValidStreams) {
  auto spec = first_order_spec(100000, 12);
  PartitionRegistry reg;
  auto events = generate_partitioned(spec, {"k1", "k2"}, 9, reg);
  std::map<PartitionId, std::vector<SymbolId>> per_key;
  std::map<PartitionId, std::int64_t> last;
  for (const auto& ev : events) {
    EXPECT_EQ(ev.index, ++last[ev.partition]);
    per_key[ev.partition].push_back(ev.symbol);
  }
  ASSERT_EQ(per_key.size(), 2U);
  for (auto& [p, syms] : per_key) {
    EXPECT_GT(syms.size(), 40000U);
    auto cond = conditionals(syms, 3);
    for (SymbolId a = 0; a < 3; ++a)
      for (SymbolId b = 0; b < 3; ++b) EXPECT_NEAR(cond[a][b], spec.table.at({a})[b], 0.02);
  }
  EXPECT_THROW(generate_partitioned(spec, {}, 1, reg), ConfigError);
}

TEST(Synthgen, SpecValidation) {
  auto spec = first_order_spec(10, 1);
  spec.table.erase({2});
  EXPECT_THROW(generate(spec), ConfigError);
  spec = first_order_spec(10, 1);
  spec.table[{0}] = {0.5, 0.5, 0.5};
  EXPECT_THROW(generate(spec), ConfigError);
  spec = first_order_spec(10, 1);
  spec.table[{0}] = {0.5, 0.5};
  EXPECT_THROW(generate(spec), ConfigError);
}

TEST(Synthgen, JsonRoundTrip) {
  auto spec = first_order_spec(1234, 77);
  GeneratorSpec back = spec_from_json(spec_to_json(spec));
  EXPECT_EQ(back.table, spec.table);
  EXPECT_EQ(back.seed, spec.seed);
  EXPECT_EQ(back.length, spec.length);
  EXPECT_EQ(generate_symbols(back), generate_symbols(spec));
  auto doc = spec_to_json(spec);
  doc["rng"] = "other";
  EXPECT_THROW(spec_from_json(doc), ConfigError);
  doc = spec_to_json(spec);
  doc["table"][0]["context"][0] = "zz";
  EXPECT_THROW(spec_from_json(doc), ConfigError);
}

TEST(Synthgen, InducedChain) {
  auto spec = first_order_spec(10, 1);
  Dfa d1 = compile_pattern("a;b;c", fixtures::abc(), 1);
  Pmc pmc = induced_pmc(d1, spec);
  EXPECT_NO_THROW(validate_pmc(pmc));
  for (StateId q = 0; q < d1.num_states(); ++q) {
    if (d1.is_final(q) || d1.suffix_tag[q].empty()) continue;
    const auto& probs = spec.table.at(d1.suffix_tag[q]);
    for (SymbolId e = 0; e < 3; ++e) {
      double expected = 0.0;
      for (SymbolId f = 0; f < 3; ++f)
        if (d1.next(q, f) == d1.next(q, e)) expected += probs[f];
      EXPECT_NEAR(pmc.prob(q, d1.next(q, e)), expected, 1e-15);
    }
  }
  EXPECT_THROW(induced_pmc(compile_pattern("a;b;c", fixtures::abc(), 0), spec), Error);
}
