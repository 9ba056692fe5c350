#ifndef PMCAST_SYNTHGEN_HPP_
#define PMCAST_SYNTHGEN_HPP_

// Reproducible event streams from a known g-order Markov source.
//
// Random numbers: each stream s of a spec draws from std::mt19937_64 seeded
// with splitmix64(seed ^ splitmix64(s)); uniforms in [0,1) are the top 53
// bits of a draw. Both generators are fully specified, so a spec reproduces
// the same stream on any conforming platform.

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmcast/automata.hpp"
#include "pmcast/error.hpp"
#include "pmcast/event.hpp"
#include "pmcast/pattern.hpp"
#include "pmcast/pmc.hpp"

namespace pmcast {

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64";

struct GeneratorSpec {
  Alphabet alphabet;
  std::size_t order = 0;
  std::map<Suffix, std::vector<double>> table;  // context (oldest first) -> next-symbol probabilities
  std::uint64_t seed = 0;
  std::size_t length = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Throws ConfigError unless every context of length `order` has a
/// probability vector over the alphabet summing to 1.
inline void validate_spec(const GeneratorSpec& spec) {
  const std::size_t r = spec.alphabet.size();
  if (r == 0) throw ConfigError("generator alphabet is empty");
  double expected = std::pow(static_cast<double>(r), static_cast<double>(spec.order));
  if (static_cast<double>(spec.table.size()) != expected)
    throw ConfigError("generator table must cover all " + std::to_string(static_cast<long long>(expected)) +
                      " contexts");
  for (const auto& [ctx, probs] : spec.table) {
    if (ctx.size() != spec.order) throw ConfigError("generator context has wrong length");
    for (SymbolId s : ctx)
      if (s >= r) throw ConfigError("generator context symbol out of range");
    if (probs.size() != r) throw ConfigError("generator probability vector has wrong length");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw ConfigError("negative generator probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("generator probabilities sum to " + std::to_string(sum));
  }
}

/// One independent symbol source following the spec's conditionals.
class MarkovSource {
 public:
  MarkovSource(const GeneratorSpec& spec, std::uint64_t stream) : spec_(&spec), rng_(derive_seed(spec.seed, stream)) {}

  SymbolId next() {
    const std::size_t r = spec_->alphabet.size();
    SymbolId sym;
    if (context_.size() < spec_->order) {
      sym = static_cast<SymbolId>(std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(r)), r - 1));
    } else {
      const auto& probs = spec_->table.at(context_);
      const double u = uniform01(rng_);
      double cum = 0.0;
      sym = static_cast<SymbolId>(r - 1);
      while (sym > 0 && probs[sym] == 0.0) --sym;  // fallback: last symbol with mass
      for (SymbolId e = 0; e < r; ++e) {
        cum += probs[e];
        if (u < cum) {
          sym = e;
          break;
        }
      }
    }
    if (spec_->order > 0) {
      context_.push_back(sym);
      if (context_.size() > spec_->order) context_.erase(context_.begin());
    }
    return sym;
  }

 private:
  const GeneratorSpec* spec_;
  std::mt19937_64 rng_;
  Suffix context_;
};

inline std::vector<SymbolId> generate_symbols(const GeneratorSpec& spec) {
  validate_spec(spec);
  MarkovSource source(spec, 0);
  std::vector<SymbolId> out(spec.length);
  for (auto& s : out) s = source.next();
  return out;
}

/// Single-partition stream with indices 1..length.
inline std::vector<Event> generate(const GeneratorSpec& spec) { return make_events(generate_symbols(spec)); }

/// spec.length events spread over independent per-key sources; the key of
/// each event is drawn uniformly with a separate interleaving generator.
inline std::vector<Event> generate_partitioned(const GeneratorSpec& spec, const std::vector<std::string>& keys,
                                               std::uint64_t interleave_seed, PartitionRegistry& registry) {
  validate_spec(spec);
  if (keys.empty()) throw ConfigError("partitioned generation needs at least one key");
  std::vector<MarkovSource> sources;
  std::vector<PartitionId> ids;
  std::vector<std::int64_t> next_index(keys.size(), 0);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    sources.emplace_back(spec, k);
    ids.push_back(registry.intern(keys[k]));
  }
  std::mt19937_64 pick(interleave_seed);
  std::vector<Event> out;
  out.reserve(spec.length);
  for (std::size_t i = 0; i < spec.length; ++i) {
    std::size_t k = std::min(static_cast<std::size_t>(uniform01(pick) * static_cast<double>(keys.size())), keys.size() - 1);
    out.push_back({sources[k].next(), ids[k], ++next_index[k], -1});
  }
  return out;
}

/// Chain implied on `dfa` by the generator; needs dfa.order >= spec.order.
/// States whose tag is shorter than the generator order (stream warm-up
/// states) get uniform rows.
inline Pmc induced_pmc(const Dfa& dfa, const GeneratorSpec& spec) {
  if (dfa.order < spec.order) throw Error("automaton order is below the generator order");
  const std::size_t r = spec.alphabet.size();
  return pmc_from_symbol_model(dfa, [&](const Suffix& tag) {
    if (tag.size() < spec.order) return std::vector<double>(r, 1.0 / static_cast<double>(r));
    Suffix ctx(tag.end() - static_cast<std::ptrdiff_t>(spec.order), tag.end());
    return spec.table.at(ctx);
  });
}

inline nlohmann::json spec_to_json(const GeneratorSpec& spec) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [ctx, probs] : spec.table) {
    nlohmann::json names = nlohmann::json::array();
    for (SymbolId s : ctx) names.push_back(spec.alphabet.name(s));
    table.push_back({{"context", names}, {"probs", probs}});
  }
  return {{"alphabet", spec.alphabet.symbols()}, {"order", spec.order}, {"seed", spec.seed},
          {"length", spec.length}, {"rng", kRngAlgorithm}, {"table", table}};
}

inline GeneratorSpec spec_from_json(const nlohmann::json& doc) {
  try {
    GeneratorSpec spec;
    spec.alphabet = Alphabet(doc.at("alphabet").get<std::vector<std::string>>());
    spec.order = doc.at("order").get<std::size_t>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.length = doc.at("length").get<std::size_t>();
    if (doc.contains("rng") && doc.at("rng").get<std::string>() != kRngAlgorithm)
      throw ConfigError("unsupported rng '" + doc.at("rng").get<std::string>() + "'");
    for (const auto& entry : doc.at("table")) {
      Suffix ctx;
      for (const auto& name : entry.at("context").get<std::vector<std::string>>()) ctx.push_back(spec.alphabet.id(name));
      if (!spec.table.emplace(ctx, entry.at("probs").get<std::vector<double>>()).second)
        throw ConfigError("duplicate generator context");
    }
    validate_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed generator spec: ") + ex.what());
  } catch (const UnknownSymbolError& ex) {
    throw ConfigError(std::string("generator spec: ") + ex.what());
  }
}

inline GeneratorSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open generator spec " + path.string());
  try {
    return spec_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError("generator spec parse error: " + std::string(ex.what()));
  }
}

}  // namespace pmcast

#endif  // PMCAST_SYNTHGEN_HPP_
