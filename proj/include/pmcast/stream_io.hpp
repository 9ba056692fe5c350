#ifndef PMCAST_STREAM_IO_HPP_
#define PMCAST_STREAM_IO_HPP_

// Event files: one event per line, `symbol[,partition_key[,ground_truth]]`.
// A first line whose first field is the symbol column name is a header;
// with a header, columns are picked by name. Blank lines and lines starting
// with '#' are skipped.

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmcast/engine.hpp"
#include "pmcast/error.hpp"
#include "pmcast/event.hpp"
#include "pmcast/model_io.hpp"
#include "pmcast/pattern.hpp"

namespace pmcast {

struct ReadOptions {
  std::string symbol_column = "symbol";
  std::optional<std::string> partition_attribute;  // unset: whole stream is one run
  std::string ground_truth_column = "ground_truth";
  std::map<std::string, std::string> symbol_map;  // raw value -> alphabet symbol
  char delimiter = ',';
};

struct ReadResult {
  std::vector<Event> events;
  std::size_t rejected = 0;               // lines with symbols outside the alphabet
  std::vector<std::string> diagnostics;   // first few rejections, for the error channel
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) {
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

inline std::int8_t parse_label(const std::string& v, std::size_t line_no) {
  if (v.empty()) return -1;
  if (v == "1" || v == "true" || v == "TRUE" || v == "True") return 1;
  if (v == "0" || v == "false" || v == "FALSE" || v == "False") return 0;
  throw StreamError("line " + std::to_string(line_no) + ": bad ground-truth value '" + v + "'");
}

}  // namespace detail

inline ReadResult read_events(std::istream& in, const Alphabet& alphabet, const ReadOptions& opts,
                              PartitionRegistry& registry) {
  ReadResult result;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> sym_col = 0, part_col, gt_col;
  bool first = true;
  std::vector<std::int64_t> next_index;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    auto fields = detail::split_line(line, opts.delimiter);
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == opts.symbol_column) {
        sym_col.reset();
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (fields[i] == opts.symbol_column) sym_col = i;
          if (opts.partition_attribute && fields[i] == *opts.partition_attribute) part_col = i;
          if (fields[i] == opts.ground_truth_column) gt_col = i;
        }
        if (opts.partition_attribute && !part_col)
          throw StreamError("partition attribute '" + *opts.partition_attribute + "' not in header");
        continue;
      }
      if (opts.partition_attribute) part_col = 1;
      gt_col = 2;
    }
    if (*sym_col >= fields.size()) throw StreamError("line " + std::to_string(line_no) + ": missing symbol field");
    std::string raw = fields[*sym_col];
    if (auto it = opts.symbol_map.find(raw); it != opts.symbol_map.end()) raw = it->second;
    auto sym = alphabet.find(raw);
    if (!sym) {
      ++result.rejected;
      if (result.diagnostics.size() < 10)
        result.diagnostics.push_back("line " + std::to_string(line_no) + ": unknown symbol '" + raw + "'");
      continue;
    }
    PartitionId part = 0;
    if (part_col) {
      if (*part_col >= fields.size())
        throw StreamError("line " + std::to_string(line_no) + ": missing partition field");
      part = registry.intern(fields[*part_col]);
    }
    std::int8_t label = -1;
    if (gt_col && *gt_col < fields.size()) label = detail::parse_label(fields[*gt_col], line_no);
    if (part >= next_index.size()) next_index.resize(part + 1, 0);
    result.events.push_back({*sym, part, ++next_index[part], label});
  }
  return result;
}

inline void write_events(std::ostream& out, const std::vector<Event>& events, const Alphabet& alphabet,
                         const PartitionRegistry& registry, bool with_partition) {
  out << "symbol";
  if (with_partition) out << ",partition";
  out << '\n';
  for (const auto& ev : events) {
    out << alphabet.name(ev.symbol);
    if (with_partition) out << ',' << registry.name(ev.partition);
    out << '\n';
  }
}

inline void write_output_header(std::ostream& out) {
  out << "p_fc,partition,index,symbol,state,forecast_start,forecast_end,forecast_prob,is_match\n";
}

/// Per-event output records. With dedupe, a non-match record repeating the
/// previous record's (state, forecast) in the same partition is dropped.
class OutputWriter {
 public:
  OutputWriter(std::ostream& out, const Dfa& dfa, const PartitionRegistry& registry, double p_fc, bool dedupe)
      : out_(out), dfa_(dfa), registry_(registry), p_fc_(format_double(p_fc)), dedupe_(dedupe) {}

  void write(const EngineOutput& o) {
    if (dedupe_) {
      if (o.partition >= last_.size()) last_.resize(o.partition + 1);
      auto& prev = last_[o.partition];
      Key key{o.state, o.emission, o.interval.start, o.interval.end};
      if (o.match) {
        prev.reset();  // matches are always reported
      } else {
        if (prev && *prev == key) return;
        prev = key;
      }
    }
    out_ << p_fc_ << ',' << registry_.name(o.partition) << ',' << o.index << ',' << dfa_.alphabet.name(o.symbol) << ','
         << o.state << ',';
    switch (o.emission) {
      case Emission::Interval:
        out_ << o.interval.start << ',' << o.interval.end << ',' << format_double(o.interval.probability);
        break;
      case Emission::NoForecast: out_ << "NO_FORECAST,,"; break;
      case Emission::None: out_ << ",,"; break;
    }
    out_ << ',' << (o.match ? 1 : 0) << '\n';
  }

 private:
  struct Key {
    StateId state;
    Emission emission;
    std::size_t start, end;
    bool operator==(const Key&) const = default;
  };
  std::ostream& out_;
  const Dfa& dfa_;
  const PartitionRegistry& registry_;
  std::string p_fc_;
  bool dedupe_;
  std::vector<std::optional<Key>> last_;
};

}  // namespace pmcast

#endif  // PMCAST_STREAM_IO_HPP_
