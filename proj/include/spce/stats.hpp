#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spce/rng.hpp"

namespace spce {

// Time series of small-integer category labels, optionally timestamped
// (nanoseconds, non-decreasing). The raw material of every purity test.
struct CategoricalSeries {
  std::vector<int> values;
  std::vector<std::int64_t> timestamps;  // empty when absent
  int n_categories = 0;

  bool has_timestamps() const { return !timestamps.empty(); }
  void validate() const;
};

std::vector<std::int64_t> category_counts(const CategoricalSeries& series);

enum class TestMethod { Exact, Asymptotic };

struct TestReport {
  std::string test_name;
  double statistic = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;  // equals p_value unless a family adjustment ran
  TestMethod method = TestMethod::Asymptotic;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  double alpha = 0.05;
  bool reject = false;  // p_adjusted < alpha
};

// Splits into contiguous half-open windows [t0 + k*dt, t0 + (k+1)*dt)
// anchored at the first timestamp. Empty windows are dropped; concatenating
// the segments in order reproduces the original values.
std::vector<CategoricalSeries> segment_by_time(const CategoricalSeries& series,
                                               std::int64_t delta_t_ns);

// Intensity-reduction procedures. A pure ensemble's outcome distribution
// must be invariant under every one of them.
struct ReductionSpec {
  enum class Kind { BernoulliThin, Decimate, TimeTruncate };

  Kind kind = Kind::BernoulliThin;
  double probability = 1.0;    // BernoulliThin: keep each event with prob p
  std::int64_t every_k = 1;    // Decimate: keep indices 0, k, 2k, ...
  double fraction = 1.0;       // TimeTruncate: keep the leading time fraction

  static ReductionSpec bernoulli(double p);
  static ReductionSpec decimate(std::int64_t k);
  static ReductionSpec truncate(double fraction);

  std::string label() const;
};

// Applies one reduction, preserving order (and timestamps when present).
CategoricalSeries reduce_intensity(const CategoricalSeries& series,
                                   const ReductionSpec& spec, RandomStream& rng);

// Wilcoxon-Mann-Whitney two-sample test with mid-ranks for ties. Exact null
// distribution by enumeration when n1 + n2 <= exact_max_n and the pooled
// sample is tie-free; otherwise normal approximation with tie and continuity
// corrections. Two-sided p; statistic is U for sample 1.
TestReport wmw_test(std::span<const double> sample1, std::span<const double> sample2,
                    double alpha, int exact_max_n = 20);

// Wald-Wolfowitz runs test on a 0/1 sequence. Exact combinatorial null
// distribution when n <= exact_max_n, else normal approximation with
// continuity correction. The two-sided exact p sums the observed outcome and
// every strictly less likely run count (minimum-likelihood convention).
TestReport runs_test(std::span<const int> binary, double alpha,
                     int exact_max_n = 30);

// van der Waerden normal-scores test: statistic is the sum over sample 1 of
// the scores Phi^-1(midrank / (N+1)). Exact permutation enumeration when
// N <= exact_max_n, else normal approximation from the permutation moments.
TestReport normal_scores_test(std::span<const double> sample1,
                              std::span<const double> sample2, double alpha,
                              int exact_max_n = 20);

// Pearson chi-square homogeneity across segment count rows. Categories whose
// expected count falls below 1 are pooled into the adjacent category before
// the statistic is formed, with the degrees of freedom reduced accordingly.
TestReport chi2_homogeneity(const std::vector<std::vector<std::int64_t>>& counts,
                            double alpha);

struct PeriodogramResult {
  std::vector<double> frequency;  // cycles per step, k/n for k = 1..n/2
  std::vector<double> power;
  double dominant_frequency = 0.0;
  double dominant_power = 0.0;
  double fisher_g = 0.0;    // max power / total power
  double fisher_p = 1.0;    // p-value for the dominant peak
};

// Discrete Fourier power spectrum of the mean-removed series, with the
// dominant-frequency report and Fisher's g test for its significance. The
// Nyquist ordinate is included so period-2 structure stays visible.
PeriodogramResult periodogram(std::span<const double> series);

// Holm-Bonferroni step-down adjustment; returns adjusted p-values in the
// input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

struct PurityTestEntry {
  std::string sample_1;
  std::string sample_2;
  TestReport report;
};

struct PurityProtocolResult {
  std::vector<PurityTestEntry> entries;
  std::string adjustment = "holm-bonferroni";
  double alpha = 0.05;
  bool reject_h0 = false;  // true iff any adjusted p < alpha
};

// The compatibility protocol: segment the series into time windows S_i,
// derive reduced samples S_i(j) with each procedure, then run the full test
// battery (WMW, normal scores, chi-square) across all segment pairs and all
// reduced-vs-original pairs. Family-wise error is controlled with
// Holm-Bonferroni; H0 ("one statistical population") is rejected iff any
// adjusted p-value falls below alpha.
PurityProtocolResult purity_protocol(const CategoricalSeries& series,
                                     std::int64_t delta_t_ns,
                                     std::span<const ReductionSpec> procedures,
                                     double alpha, RandomStream& rng,
                                     int threads = 1);

}  // namespace spce
