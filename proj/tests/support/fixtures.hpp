#ifndef PMCAST_TESTS_FIXTURES_HPP_
#define PMCAST_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "pmcast/automata.hpp"
#include "pmcast/pmc.hpp"

namespace fixtures {

inline pmcast::Alphabet abc() { return pmcast::Alphabet({"a", "b", "c"}); }

/// Σ*·(a;c;c) over {a,b,c}: the four-state running example.
inline pmcast::Dfa acc_dfa(std::size_t m = 0) { return pmcast::compile_pattern("a;c;c", abc(), m); }

inline pmcast::Pmc acc_uniform(std::size_t m = 0) {
  return pmcast::pmc_from_symbol_probabilities(acc_dfa(m), {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

inline std::vector<pmcast::SymbolId> symbols(const pmcast::Alphabet& alphabet, const std::string& text) {
  std::vector<pmcast::SymbolId> out;
  for (char c : text) out.push_back(alphabet.id(std::string(1, c)));
  return out;
}

}  // namespace fixtures

#endif  // PMCAST_TESTS_FIXTURES_HPP_
