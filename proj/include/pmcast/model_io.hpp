#ifndef PMCAST_MODEL_IO_HPP_
#define PMCAST_MODEL_IO_HPP_

// Model file: versioned JSON holding the compiled automaton and, once
// learned, the transition matrix. Probabilities are written as the
// shortest decimal string that reads back to the same double.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pmcast/automata.hpp"
#include "pmcast/error.hpp"
#include "pmcast/pmc.hpp"

namespace pmcast {

inline constexpr const char* kModelFormat = "pmcast-model";
inline constexpr int kModelVersion = 1;

struct LoadedModel {
  Dfa dfa;
  std::optional<Pmc> pmc;  // absent for compile-only models
};

inline std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

inline double parse_double(const std::string& text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size())
    throw ModelError("malformed number '" + text + "'");
  return value;
}

namespace detail {

using nlohmann::json;

inline json dfa_to_json(const Dfa& dfa) {
  json states = json::array();
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    json row = json::array();
    for (SymbolId e = 0; e < dfa.num_symbols(); ++e) row.push_back(dfa.next(q, e));
    json tag = json::array();
    for (SymbolId s : dfa.suffix_tag[q]) tag.push_back(dfa.alphabet.name(s));
    states.push_back({{"id", q}, {"final", dfa.is_final(q)}, {"origin", dfa.origin[q]},
                      {"suffix", tag}, {"next", row}});
  }
  return {{"num_states", dfa.num_states()}, {"finals", dfa.finals()}, {"states", states}};
}

inline json model_json(const Dfa& dfa, const Pmc* pmc) {
  json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["alphabet"] = dfa.alphabet.symbols();
  doc["pattern"] = dfa.pattern;
  doc["order"] = dfa.order;
  doc["dfa"] = dfa_to_json(dfa);
  if (pmc) {
    json rows = json::array();
    for (const auto& row : pmc->rows) {
      json r = json::array();
      for (const auto& e : row) r.push_back(json::array({e.to, format_double(e.p)}));
      rows.push_back(r);
    }
    doc["pmc"] = {{"warmup_count", pmc->warmup_count},
                  {"smoothing", format_double(pmc->smoothing)},
                  {"transitions", rows}};
  } else {
    doc["pmc"] = nullptr;
  }
  return doc;
}

template <typename T>
T field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw ModelError(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ModelError(std::string("bad field '") + key + "': " + ex.what());
  }
}

inline Dfa dfa_from_json(const json& doc) {
  Dfa dfa;
  try {
    dfa.alphabet = Alphabet(field<std::vector<std::string>>(doc, "alphabet"));
  } catch (const ConfigError& ex) {
    throw ModelError(ex.what());
  }
  dfa.pattern = field<std::string>(doc, "pattern");
  dfa.order = field<std::size_t>(doc, "order");
  const json& body = doc.at("dfa");
  const auto n = field<std::size_t>(body, "num_states");
  const json& states = body.at("states");
  if (n == 0 || !states.is_array() || states.size() != n) throw ModelError("state table has wrong shape");
  for (std::size_t q = 0; q < n; ++q) {
    const json& st = states[q];
    if (field<std::size_t>(st, "id") != q) throw ModelError("state ids out of order");
    auto next = field<std::vector<StateId>>(st, "next");
    if (next.size() != dfa.num_symbols()) throw ModelError("transition row " + std::to_string(q) + " has wrong width");
    for (StateId to : next)
      if (to >= n) throw ModelError("transition target out of range");
    dfa.delta.insert(dfa.delta.end(), next.begin(), next.end());
    dfa.final.push_back(field<bool>(st, "final") ? 1 : 0);
    auto origin = field<StateId>(st, "origin");
    if (origin >= n) throw ModelError("origin out of range");
    dfa.origin.push_back(origin);
    Suffix tag;
    for (const auto& name : field<std::vector<std::string>>(st, "suffix")) {
      auto id = dfa.alphabet.find(name);
      if (!id) throw ModelError("suffix symbol '" + name + "' not in alphabet");
      tag.push_back(*id);
    }
    if (tag.size() > dfa.order) throw ModelError("suffix longer than order");
    dfa.suffix_tag.push_back(std::move(tag));
  }
  if (field<std::vector<StateId>>(body, "finals") != dfa.finals()) throw ModelError("final-state list is inconsistent");
  compute_restart_states(dfa);
  return dfa;
}

inline Pmc pmc_from_json(const json& body, const Dfa& dfa) {
  Pmc pmc;
  pmc.dfa = dfa;
  pmc.warmup_count = field<std::uint64_t>(body, "warmup_count");
  pmc.smoothing = parse_double(field<std::string>(body, "smoothing"));
  const json& rows = body.at("transitions");
  if (!rows.is_array() || rows.size() != dfa.num_states()) throw ModelError("transition matrix has wrong row count");
  for (const auto& r : rows) {
    std::vector<PmcEntry> row;
    for (const auto& cell : r) {
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number_unsigned() || !cell[1].is_string())
        throw ModelError("malformed transition entry");
      row.push_back({cell[0].get<StateId>(), parse_double(cell[1].get<std::string>())});
    }
    pmc.rows.push_back(std::move(row));
  }
  detail::assign_partition(pmc);
  validate_pmc(pmc);
  return pmc;
}

}  // namespace detail

inline std::string model_to_string(const Dfa& dfa) { return detail::model_json(dfa, nullptr).dump(1) + "\n"; }
inline std::string model_to_string(const Pmc& pmc) { return detail::model_json(pmc.dfa, &pmc).dump(1) + "\n"; }

/// Parses and fully validates a model; nothing is returned on failure.
inline LoadedModel model_from_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ModelError(std::string("model parse error: ") + ex.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kModelFormat) throw ModelError("not a model file");
  if (doc.value("version", -1) != kModelVersion)
    throw ModelError("unsupported model version " + doc.value("version", nlohmann::json(-1)).dump());
  try {
    LoadedModel model{detail::dfa_from_json(doc), std::nullopt};
    if (doc.contains("pmc") && !doc.at("pmc").is_null()) model.pmc = detail::pmc_from_json(doc.at("pmc"), model.dfa);
    return model;
  } catch (const nlohmann::json::exception& ex) {
    throw ModelError(std::string("malformed model: ") + ex.what());
  }
}

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw ModelError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ModelError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace detail

inline void save_model(const Dfa& dfa, const std::filesystem::path& path) {
  detail::write_atomically(path, model_to_string(dfa));
}

inline void save_model(const Pmc& pmc, const std::filesystem::path& path) {
  detail::write_atomically(path, model_to_string(pmc));
}

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

}  // namespace pmcast

#endif  // PMCAST_MODEL_IO_HPP_
