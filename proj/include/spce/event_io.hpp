#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spce/simulate.hpp"

namespace spce {

// Line-based text format, bit-exact on round trip:
//   # spce-events v1
//   time_ns,side,setting,outcome
// with side in {A,B}, setting in {1,2}, outcome in {+1,-1}. Records are
// merged across sides in time order (ties: A first); within each side times
// are non-decreasing.
void write_events(const std::string& path, const std::vector<EventRecord>& stream_a,
                  const std::vector<EventRecord>& stream_b);

// Throws FormatError (with the offending line number) on any malformed
// content or ordering violation.
std::pair<std::vector<EventRecord>, std::vector<EventRecord>> read_events(
    const std::string& path);

}  // namespace spce
