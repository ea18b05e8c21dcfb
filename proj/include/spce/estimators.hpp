#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spce/simulate.hpp"

namespace spce {

// Correlation estimate from post-selected coincidences:
//   e_hat  = (n_pp + n_mm - n_pm - n_mp) / n
//   stderr = sqrt((1 - e_hat^2) / n)
struct CorrelationEstimate {
  double e_hat = 0.0;
  double std_err = 0.0;
  std::int64_t n_pp = 0, n_pm = 0, n_mp = 0, n_mm = 0;
  std::int64_t n_coincidences = 0;

  bool empty() const { return n_coincidences == 0; }
};

// Pairs with a NoDetect on either side are excluded (post-selection on
// double detection). Zero coincidences yields the flagged empty estimate.
CorrelationEstimate estimate_correlation(std::span<const PairOutcome> pairs);

// Convenience bridge from coincidence matching to estimation.
std::vector<PairOutcome> outcomes_from_matches(const MatchResult& matches);

// S = |E1 - E2| + |E3 + E4| for the four setting pairs
// (a,b), (a,b'), (a',b'), (a',b), with root-sum-square error propagation.
struct ChshResult {
  double s_value = 0.0;
  double s_std_err = 0.0;
  CorrelationEstimate components[4];
  double bound = 2.0;
  double decision_sigmas = 2.0;
  bool violated = false;
};

// Throws EmptyEstimate if any component estimate is empty. The violation
// decision is s_value - decision_sigmas * s_std_err > bound.
ChshResult chsh(const CorrelationEstimate& e_ab, const CorrelationEstimate& e_abp,
                const CorrelationEstimate& e_apbp, const CorrelationEstimate& e_apb,
                double bound = 2.0, double decision_sigmas = 2.0);

// Relaxed CHSH bound 4 - 2*delta, where delta is the minimum overlap
// probability of the per-experiment hidden-variable subsets. delta = 1
// recovers the bound 2; delta = 0 gives the trivial bound 4.
double larsson_gill_bound(double delta);

// Per-run counting summary used for detection-rate diagnostics.
struct RateRow {
  std::string run_id;
  int setting_a = 1;
  int setting_b = 1;
  double duration_s = 0.0;
  std::int64_t events_a = 0;
  std::int64_t events_b = 0;
  std::int64_t coincidences = 0;
  double singles_rate_a_hz = 0.0;
  double singles_rate_b_hz = 0.0;
  double coincidence_rate_hz = 0.0;
  double detected_fraction_a = 0.0;  // coincidences / events_a
  double detected_fraction_b = 0.0;
};

// A pair of runs whose singles rates on one side disagree beyond the
// threshold; the anomaly signature the summary is built to expose.
struct RateAnomaly {
  char side = 'A';
  std::string run_1, run_2;
  double rate_1_hz = 0.0, rate_2_hz = 0.0;
  double z = 0.0;
};

struct RateSummary {
  std::vector<RateRow> rows;
  std::vector<RateAnomaly> flags;
  double threshold_sigmas = 5.0;

  bool anomalous() const { return !flags.empty(); }
};

// Builds one summary row from a matched run.
RateRow tally_run(const std::string& run_id, const MatchResult& matches,
                  const std::vector<EventRecord>& stream_a,
                  const std::vector<EventRecord>& stream_b);

// Fills in rates and compares singles rates across runs per side; any pair
// differing by more than threshold_sigmas combined Poisson standard errors
// raises a flag. Rows without events are dropped from the table.
RateSummary rate_summary(std::span<const RateRow> rows,
                         double threshold_sigmas = 5.0);

}  // namespace spce
