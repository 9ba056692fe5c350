#ifndef PMCAST_EVENT_HPP_
#define PMCAST_EVENT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmcast/pattern.hpp"

namespace pmcast {

/// Interned partition key. 0 is the implicit partition of unpartitioned streams.
using PartitionId = std::uint32_t;

struct Event {
  SymbolId symbol = 0;
  PartitionId partition = 0;
  std::int64_t index = 0;          // 1-based, strictly increasing per partition
  std::int8_t ground_truth = -1;   // -1 unknown, 0 false, 1 true
};

class PartitionRegistry {
 public:
  PartitionRegistry() : names_{""} { ids_.emplace("", 0); }

  PartitionId intern(std::string_view key) {
    auto [it, inserted] = ids_.emplace(std::string(key), static_cast<PartitionId>(names_.size()));
    if (inserted) names_.emplace_back(key);
    return it->second;
  }

  const std::string& name(PartitionId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, PartitionId> ids_;
};

/// Events for a plain symbol sequence: one partition, indices 1..n.
inline std::vector<Event> make_events(const std::vector<SymbolId>& symbols) {
  std::vector<Event> events;
  events.reserve(symbols.size());
  std::int64_t index = 0;
  for (SymbolId s : symbols) events.push_back({s, 0, ++index, -1});
  return events;
}

}  // namespace pmcast

#endif  // PMCAST_EVENT_HPP_
