#include "spce/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "spce/errors.hpp"

namespace spce {

namespace {

// Child-stream index layout under the per-run key: 0 emission, 1 reserved,
// 2+i for pair i. Keeping the layout fixed is what makes the draws
// independent of worker count and of later additions.
constexpr std::uint64_t kEmissionStream = 0;
constexpr std::uint64_t kFirstPairStream = 2;

RandomStream run_stream(const ExperimentConfig& config) {
  return RandomStream(config.master_seed, stable_hash(config.run_id));
}

void parallel_chunks(std::int64_t n, int threads,
                     const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  const int workers = std::min<std::int64_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_pairs < 1) throw ValidationError("n_pairs must be >= 1");
  if (!(efficiency_a > 0.0 && efficiency_a <= 1.0))
    throw ValidationError("efficiency_a must lie in (0, 1]");
  if (!(efficiency_b > 0.0 && efficiency_b <= 1.0))
    throw ValidationError("efficiency_b must lie in (0, 1]");
  if (coincidence_window_ns <= 0)
    throw ValidationError("coincidence_window_ns must be positive");
  if (!(pair_rate_hz > 0.0)) throw ValidationError("pair_rate_hz must be positive");
  if (setting_a != 1 && setting_a != 2)
    throw ValidationError("setting_a must be 1 or 2");
  if (setting_b != 1 && setting_b != 2)
    throw ValidationError("setting_b must be 1 or 2");
}

std::vector<PairOutcome> run_experiment(const ExperimentConfig& config,
                                        int threads) {
  config.validate();
  const PairGenerator generate = make_pair_generator(config.model_id);
  const RandomStream base = run_stream(config);

  std::vector<PairOutcome> pairs(static_cast<std::size_t>(config.n_pairs));
  parallel_chunks(config.n_pairs, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      RandomStream rng = base.child(kFirstPairStream + static_cast<std::uint64_t>(i));
      auto [a, b] = generate(config.analyzer_a, config.analyzer_b, rng);
      if (a != Outcome::NoDetect && config.efficiency_a < 1.0 &&
          !rng.bernoulli(config.efficiency_a)) {
        a = Outcome::NoDetect;
      }
      if (b != Outcome::NoDetect && config.efficiency_b < 1.0 &&
          !rng.bernoulli(config.efficiency_b)) {
        b = Outcome::NoDetect;
      }
      pairs[static_cast<std::size_t>(i)] = PairOutcome{a, b};
    }
  });
  return pairs;
}

std::pair<std::vector<EventRecord>, std::vector<EventRecord>> emit_event_streams(
    const ExperimentConfig& config, const std::vector<PairOutcome>& pairs,
    RandomStream& rng, EmissionTrace* trace) {
  std::vector<EventRecord> stream_a, stream_b;
  if (trace) {
    trace->pair_index_a.clear();
    trace->pair_index_b.clear();
  }
  const double mean_gap_s = 1.0 / config.pair_rate_hz;
  const std::int64_t jitter = config.effective_jitter_ns();
  std::int64_t t_ns = 0;
  std::int64_t index = 0;
  for (const PairOutcome& p : pairs) {
    t_ns += std::llround(rng.exponential(mean_gap_s) * 1e9);
    if (p.a != Outcome::NoDetect) {
      const std::int64_t j =
          jitter > 0 ? static_cast<std::int64_t>(
                           rng.uniform_below(static_cast<std::uint64_t>(jitter) + 1))
                     : 0;
      stream_a.push_back(EventRecord{t_ns + j, Side::A, config.setting_a,
                                     static_cast<int>(p.a)});
      if (trace) trace->pair_index_a.push_back(index);
    }
    if (p.b != Outcome::NoDetect) {
      const std::int64_t j =
          jitter > 0 ? static_cast<std::int64_t>(
                           rng.uniform_below(static_cast<std::uint64_t>(jitter) + 1))
                     : 0;
      stream_b.push_back(EventRecord{t_ns + j, Side::B, config.setting_b,
                                     static_cast<int>(p.b)});
      if (trace) trace->pair_index_b.push_back(index);
    }
    ++index;
  }
  // Jitter can reorder clicks from near-simultaneous emissions; restore the
  // per-side time order required downstream. Indices move with their events.
  auto sort_with_trace = [](std::vector<EventRecord>& stream,
                            std::vector<std::int64_t>* idx) {
    if (!idx) {
      std::stable_sort(stream.begin(), stream.end(),
                       [](const EventRecord& x, const EventRecord& y) {
                         return x.time_ns < y.time_ns;
                       });
      return;
    }
    std::vector<std::size_t> order(stream.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return stream[x].time_ns < stream[y].time_ns;
    });
    std::vector<EventRecord> s2(stream.size());
    std::vector<std::int64_t> i2(stream.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      s2[i] = stream[order[i]];
      i2[i] = (*idx)[order[i]];
    }
    stream.swap(s2);
    idx->swap(i2);
  };
  sort_with_trace(stream_a, trace ? &trace->pair_index_a : nullptr);
  sort_with_trace(stream_b, trace ? &trace->pair_index_b : nullptr);
  return {std::move(stream_a), std::move(stream_b)};
}

namespace {

void check_sorted(const std::vector<EventRecord>& stream, const char* name) {
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].time_ns < stream[i - 1].time_ns) {
      throw UnsortedStream(std::string("event stream ") + name +
                           " violates time order at record " + std::to_string(i));
    }
  }
}

}  // namespace

MatchResult match_coincidences(const std::vector<EventRecord>& stream_a,
                               const std::vector<EventRecord>& stream_b,
                               std::int64_t window_ns) {
  check_sorted(stream_a, "A");
  check_sorted(stream_b, "B");

  MatchResult result;
  std::map<int, std::int64_t> singles_a, singles_b;
  std::size_t i = 0, j = 0;
  while (i < stream_a.size() && j < stream_b.size()) {
    const std::int64_t dt = stream_a[i].time_ns - stream_b[j].time_ns;
    if (std::llabs(dt) <= window_ns) {
      result.matched.push_back(MatchedPair{stream_a[i], stream_b[j]});
      ++i;
      ++j;
    } else if (dt < 0) {
      ++singles_a[stream_a[i].setting];
      ++i;
    } else {
      ++singles_b[stream_b[j].setting];
      ++j;
    }
  }
  for (; i < stream_a.size(); ++i) ++singles_a[stream_a[i].setting];
  for (; j < stream_b.size(); ++j) ++singles_b[stream_b[j].setting];

  for (const auto& [setting, count] : singles_a) {
    result.singles_a_by_setting.emplace_back(setting, count);
    result.singles_a += count;
  }
  for (const auto& [setting, count] : singles_b) {
    result.singles_b_by_setting.emplace_back(setting, count);
    result.singles_b += count;
  }
  return result;
}

}  // namespace spce
