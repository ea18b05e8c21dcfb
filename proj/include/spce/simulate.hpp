#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spce/models.hpp"

namespace spce {

enum class Side { A, B };

// One detector click: time since run start in integer nanoseconds (integer
// so that file output is bit-exact), the side it fired on, the analyzer
// setting index in force, and the +-1 result.
struct EventRecord {
  std::int64_t time_ns = 0;
  Side side = Side::A;
  int setting = 1;
  int outcome = +1;  // +1 or -1
};

// Per-pair results after efficiency thinning; NoDetect marks a lost side.
struct PairOutcome {
  Outcome a = Outcome::NoDetect;
  Outcome b = Outcome::NoDetect;
};

// Full description of one run. master_seed plus run_id determine every
// random draw; identical configs replay bit-identically.
struct ExperimentConfig {
  std::string model_id = "qt-ideal";
  CapSpec analyzer_a{Direction::x_axis(), 0.0};
  CapSpec analyzer_b{Direction::x_axis(), 0.0};
  int setting_a = 1;  // index stamped on A-side events, in {1, 2}
  int setting_b = 1;
  std::int64_t n_pairs = 0;
  double efficiency_a = 1.0;
  double efficiency_b = 1.0;
  double pair_rate_hz = 1.0e4;
  std::int64_t coincidence_window_ns = 2000;
  std::int64_t jitter_ns = -1;  // -1: default to coincidence_window_ns / 4
  std::uint64_t master_seed = 1;
  std::string run_id = "run";

  std::int64_t effective_jitter_ns() const {
    return jitter_ns >= 0 ? jitter_ns : coincidence_window_ns / 4;
  }

  // Throws ValidationError on out-of-range fields.
  void validate() const;
};

// Generates n_pairs outcomes from the configured model, each side thinned
// independently by its detector efficiency. Pair i draws only from the
// child stream for index i, so the result is bit-identical for any thread
// count. Throws UnknownModel for an unresolvable model id.
std::vector<PairOutcome> run_experiment(const ExperimentConfig& config,
                                        int threads = 1);

// Ground-truth pair indices for the emitted events; test instrumentation.
struct EmissionTrace {
  std::vector<std::int64_t> pair_index_a;
  std::vector<std::int64_t> pair_index_b;
};

// Turns pair outcomes into two timestamped click streams: emissions follow a
// Poisson process at pair_rate_hz, each detected side gets an independent
// jitter uniform on [0, jitter_ns], NoDetect emits nothing. Streams come
// back time-sorted.
std::pair<std::vector<EventRecord>, std::vector<EventRecord>> emit_event_streams(
    const ExperimentConfig& config, const std::vector<PairOutcome>& pairs,
    RandomStream& rng, EmissionTrace* trace = nullptr);

struct MatchedPair {
  EventRecord a;
  EventRecord b;
};

struct MatchResult {
  std::vector<MatchedPair> matched;
  // Unmatched singles per side, keyed by the event's setting index.
  std::vector<std::pair<int, std::int64_t>> singles_a_by_setting;
  std::vector<std::pair<int, std::int64_t>> singles_b_by_setting;
  std::int64_t singles_a = 0;
  std::int64_t singles_b = 0;
};

// Greedy earliest-first coincidence matching with a hard window: walk both
// streams in time order, pair the heads when |tA - tB| <= window, otherwise
// drop the earlier head as a single. Each event is used at most once.
// Throws UnsortedStream if either stream is out of order.
MatchResult match_coincidences(const std::vector<EventRecord>& stream_a,
                               const std::vector<EventRecord>& stream_b,
                               std::int64_t window_ns);

}  // namespace spce
