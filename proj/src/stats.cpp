// Non-parametric compatibility tests and randomness diagnostics.
//
// Conventions shared by the two-sample rank tests:
//   - ties get mid-ranks; the asymptotic variances carry the matching tie
//     corrections, so heavily tied categorical data is handled throughout;
//   - "exact" means full enumeration of the permutation null distribution,
//     used below a configurable pooled-size threshold; above it a normal
//     approximation with continuity correction is used;
//   - two-sided p-values: tail doubling for WMW, |T - mean| ordering for the
//     normal-scores enumeration, minimum-likelihood for the runs test (the
//     observed run count plus every strictly less likely one).

#include "spce/stats.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spce/errors.hpp"

namespace spce {

namespace {

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> unit_normal;
  return boost::math::quantile(unit_normal, p);
}

// Two-sided normal p-value for |z|.
double normal_two_sided(double z_abs) { return std::erfc(z_abs / std::sqrt(2.0)); }

double chi2_survival(double x, double df) {
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

// Exact binomial coefficient as a double; fine for the n <= 64 range the
// exact tests use.
double choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

struct TieGroup {
  double value;
  std::int64_t n1;
  std::int64_t n2;
  double midrank;
};

constexpr int kCountingMaxLabel = 4096;

bool small_int_labels(std::span<const double> s, int& max_label) {
  for (double v : s) {
    if (!(v >= 0.0) || v != std::floor(v) || v >= kCountingMaxLabel) return false;
    max_label = std::max(max_label, static_cast<int>(v));
  }
  return true;
}

// Pools the two samples into value-sorted tie groups with mid-ranks.
// Counting path for small-integer labels (categorical data), sort-merge
// otherwise.
std::vector<TieGroup> pooled_tie_groups(std::span<const double> s1,
                                        std::span<const double> s2) {
  std::vector<TieGroup> groups;
  int max_label = 0;
  if (small_int_labels(s1, max_label) && small_int_labels(s2, max_label)) {
    std::vector<std::int64_t> c1(max_label + 1, 0), c2(max_label + 1, 0);
    for (double v : s1) ++c1[static_cast<int>(v)];
    for (double v : s2) ++c2[static_cast<int>(v)];
    std::int64_t seen = 0;
    for (int v = 0; v <= max_label; ++v) {
      const std::int64_t t = c1[v] + c2[v];
      if (t == 0) continue;
      groups.push_back(TieGroup{static_cast<double>(v), c1[v], c2[v],
                                static_cast<double>(seen) + (t + 1) / 2.0});
      seen += t;
    }
    return groups;
  }

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(s1.size() + s2.size());
  for (double v : s1) pooled.emplace_back(v, 0);
  for (double v : s2) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t i = 0;
  std::int64_t seen = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    std::int64_t n1 = 0, n2 = 0;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) {
      (pooled[j].second == 0 ? n1 : n2)++;
      ++j;
    }
    const std::int64_t t = n1 + n2;
    groups.push_back(TieGroup{pooled[i].first, n1, n2,
                              static_cast<double>(seen) + (t + 1) / 2.0});
    seen += t;
    i = j;
  }
  return groups;
}

bool has_ties(const std::vector<TieGroup>& groups) {
  for (const TieGroup& g : groups) {
    if (g.n1 + g.n2 > 1) return true;
  }
  return false;
}

// Null distribution of the Mann-Whitney U statistic: count[u] arrangements
// with statistic u, via the standard recurrence
//   f(m, n, u) = f(m, n-1, u) + f(m-1, n, u-n).
std::vector<double> mann_whitney_null_counts(std::int64_t n1, std::int64_t n2) {
  const std::int64_t umax = n1 * n2;
  std::vector<std::vector<double>> dp(n1 + 1, std::vector<double>(umax + 1, 0.0));
  for (std::int64_t m = 0; m <= n1; ++m) dp[m][0] = 1.0;
  for (std::int64_t n = 1; n <= n2; ++n) {
    for (std::int64_t m = 1; m <= n1; ++m) {
      for (std::int64_t u = umax; u >= n; --u) {
        dp[m][u] += dp[m - 1][u - n];
      }
    }
  }
  return dp[n1];
}

}  // namespace

void CategoricalSeries::validate() const {
  for (int v : values) {
    if (v < 0 || v >= n_categories) {
      throw DomainError("CategoricalSeries: label out of range");
    }
  }
  if (!timestamps.empty()) {
    if (timestamps.size() != values.size()) {
      throw DomainError("CategoricalSeries: timestamps/values size mismatch");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (timestamps[i] < timestamps[i - 1]) {
        throw UnsortedStream("CategoricalSeries: timestamps must be sorted");
      }
    }
  }
}

std::vector<std::int64_t> category_counts(const CategoricalSeries& series) {
  std::vector<std::int64_t> counts(series.n_categories, 0);
  for (int v : series.values) ++counts[v];
  return counts;
}

std::vector<CategoricalSeries> segment_by_time(const CategoricalSeries& series,
                                               std::int64_t delta_t_ns) {
  if (!series.has_timestamps()) {
    throw MissingTimestamps("segment_by_time: series has no timestamps");
  }
  if (delta_t_ns <= 0) throw DomainError("segment_by_time: delta_t must be positive");
  series.validate();

  std::vector<CategoricalSeries> segments;
  const std::int64_t t0 = series.timestamps.front();
  std::int64_t current_window = -1;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const std::int64_t w = (series.timestamps[i] - t0) / delta_t_ns;
    if (w != current_window) {
      segments.push_back(CategoricalSeries{{}, {}, series.n_categories});
      current_window = w;
    }
    segments.back().values.push_back(series.values[i]);
    segments.back().timestamps.push_back(series.timestamps[i]);
  }
  return segments;
}

ReductionSpec ReductionSpec::bernoulli(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("BernoulliThin: probability must lie in (0, 1]");
  }
  ReductionSpec s;
  s.kind = Kind::BernoulliThin;
  s.probability = p;
  return s;
}

ReductionSpec ReductionSpec::decimate(std::int64_t k) {
  if (k < 1) throw DomainError("Decimate: k must be >= 1");
  ReductionSpec s;
  s.kind = Kind::Decimate;
  s.every_k = k;
  return s;
}

ReductionSpec ReductionSpec::truncate(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("TimeTruncate: fraction must lie in (0, 1]");
  }
  ReductionSpec s;
  s.kind = Kind::TimeTruncate;
  s.fraction = fraction;
  return s;
}

std::string ReductionSpec::label() const {
  char buf[64];
  switch (kind) {
    case Kind::BernoulliThin:
      std::snprintf(buf, sizeof(buf), "thin:%g", probability);
      break;
    case Kind::Decimate:
      std::snprintf(buf, sizeof(buf), "decimate:%lld",
                    static_cast<long long>(every_k));
      break;
    case Kind::TimeTruncate:
      std::snprintf(buf, sizeof(buf), "truncate:%g", fraction);
      break;
  }
  return buf;
}

CategoricalSeries reduce_intensity(const CategoricalSeries& series,
                                   const ReductionSpec& spec, RandomStream& rng) {
  CategoricalSeries out;
  out.n_categories = series.n_categories;
  const bool timed = series.has_timestamps();
  auto keep = [&](std::size_t i) {
    out.values.push_back(series.values[i]);
    if (timed) out.timestamps.push_back(series.timestamps[i]);
  };
  switch (spec.kind) {
    case ReductionSpec::Kind::BernoulliThin: {
      if (!(spec.probability > 0.0 && spec.probability <= 1.0)) {
        throw DomainError("BernoulliThin: probability must lie in (0, 1]");
      }
      for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (rng.bernoulli(spec.probability)) keep(i);
      }
      break;
    }
    case ReductionSpec::Kind::Decimate: {
      if (spec.every_k < 1) throw DomainError("Decimate: k must be >= 1");
      for (std::size_t i = 0; i < series.values.size();
           i += static_cast<std::size_t>(spec.every_k)) {
        keep(i);
      }
      break;
    }
    case ReductionSpec::Kind::TimeTruncate: {
      if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
        throw DomainError("TimeTruncate: fraction must lie in (0, 1]");
      }
      if (!timed) throw MissingTimestamps("TimeTruncate: series has no timestamps");
      if (series.values.empty()) break;
      const std::int64_t t0 = series.timestamps.front();
      const std::int64_t span = series.timestamps.back() - t0;
      const std::int64_t cutoff =
          t0 + static_cast<std::int64_t>(spec.fraction * static_cast<double>(span));
      for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (series.timestamps[i] <= cutoff) keep(i);
      }
      break;
    }
  }
  return out;
}

TestReport wmw_test(std::span<const double> sample1, std::span<const double> sample2,
                    double alpha, int exact_max_n) {
  if (sample1.empty() || sample2.empty()) {
    throw EmptySample("wmw_test: both samples must be non-empty");
  }
  const std::int64_t n1 = static_cast<std::int64_t>(sample1.size());
  const std::int64_t n2 = static_cast<std::int64_t>(sample2.size());
  const std::int64_t n = n1 + n2;
  const auto groups = pooled_tie_groups(sample1, sample2);

  double rank_sum_1 = 0.0;
  double tie_cubes = 0.0;  // sum of t^3 - t over tie groups
  for (const TieGroup& g : groups) {
    rank_sum_1 += static_cast<double>(g.n1) * g.midrank;
    const double t = static_cast<double>(g.n1 + g.n2);
    tie_cubes += t * t * t - t;
  }
  const double u = rank_sum_1 - static_cast<double>(n1) * (n1 + 1) / 2.0;

  TestReport report;
  report.test_name = "wilcoxon-mann-whitney";
  report.statistic = u;
  report.n1 = n1;
  report.n2 = n2;
  report.alpha = alpha;

  if (n <= exact_max_n && !has_ties(groups)) {
    report.method = TestMethod::Exact;
    const auto counts = mann_whitney_null_counts(n1, n2);
    const double total = choose(n, n1);
    const std::int64_t u_obs = static_cast<std::int64_t>(std::llround(u));
    double below = 0.0, above = 0.0;
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(counts.size()); ++v) {
      if (v <= u_obs) below += counts[v];
      if (v >= u_obs) above += counts[v];
    }
    report.p_value = std::min(1.0, 2.0 * std::min(below, above) / total);
  } else {
    report.method = TestMethod::Asymptotic;
    const double mean = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    const double nd = static_cast<double>(n);
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((nd + 1.0) - tie_cubes / (nd * (nd - 1.0)));
    if (var <= 0.0) {
      report.p_value = 1.0;  // every pooled value identical
    } else {
      const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
      report.p_value = normal_two_sided(z);
    }
  }
  report.p_adjusted = report.p_value;
  report.reject = report.p_adjusted < alpha;
  return report;
}

TestReport runs_test(std::span<const int> binary, double alpha, int exact_max_n) {
  std::int64_t n0 = 0, n1 = 0;
  for (int v : binary) {
    if (v == 0) {
      ++n0;
    } else if (v == 1) {
      ++n1;
    } else {
      throw DomainError("runs_test: values must be 0 or 1");
    }
  }
  if (n0 == 0 || n1 == 0) {
    throw DegenerateSequence("runs_test: sequence must contain both symbols");
  }
  const std::int64_t n = n0 + n1;
  std::int64_t runs = 1;
  for (std::size_t i = 1; i < binary.size(); ++i) {
    if (binary[i] != binary[i - 1]) ++runs;
  }

  TestReport report;
  report.test_name = "runs";
  report.statistic = static_cast<double>(runs);
  report.n1 = n0;
  report.n2 = n1;
  report.alpha = alpha;

  if (n <= exact_max_n) {
    report.method = TestMethod::Exact;
    // P(R = 2k)   = 2 C(n0-1,k-1) C(n1-1,k-1) / C(n,n0)
    // P(R = 2k+1) = [C(n0-1,k) C(n1-1,k-1) + C(n0-1,k-1) C(n1-1,k)] / C(n,n0)
    const double total = choose(n, n0);
    std::vector<double> prob(n + 1, 0.0);
    for (std::int64_t r = 2; r <= n; ++r) {
      if (r % 2 == 0) {
        const std::int64_t k = r / 2;
        prob[r] = 2.0 * choose(n0 - 1, k - 1) * choose(n1 - 1, k - 1) / total;
      } else {
        const std::int64_t k = (r - 1) / 2;
        prob[r] = (choose(n0 - 1, k) * choose(n1 - 1, k - 1) +
                   choose(n0 - 1, k - 1) * choose(n1 - 1, k)) /
                  total;
      }
    }
    const double p_obs = prob[runs];
    double p = p_obs;
    for (std::int64_t r = 2; r <= n; ++r) {
      if (r != runs && prob[r] < p_obs) p += prob[r];
    }
    report.p_value = std::min(1.0, p);
  } else {
    report.method = TestMethod::Asymptotic;
    const double nd = static_cast<double>(n);
    const double two_ab = 2.0 * static_cast<double>(n0) * static_cast<double>(n1);
    const double mean = 1.0 + two_ab / nd;
    const double var = two_ab * (two_ab - nd) / (nd * nd * (nd - 1.0));
    if (var <= 0.0) {
      report.p_value = 1.0;
    } else {
      const double z =
          std::max(0.0, std::abs(static_cast<double>(runs) - mean) - 0.5) /
          std::sqrt(var);
      report.p_value = normal_two_sided(z);
    }
  }
  report.p_adjusted = report.p_value;
  report.reject = report.p_adjusted < alpha;
  return report;
}

TestReport normal_scores_test(std::span<const double> sample1,
                              std::span<const double> sample2, double alpha,
                              int exact_max_n) {
  if (sample1.empty() || sample2.empty()) {
    throw EmptySample("normal_scores_test: both samples must be non-empty");
  }
  const std::int64_t n1 = static_cast<std::int64_t>(sample1.size());
  const std::int64_t n2 = static_cast<std::int64_t>(sample2.size());
  const std::int64_t n = n1 + n2;
  const auto groups = pooled_tie_groups(sample1, sample2);
  const double nd = static_cast<double>(n);

  double statistic = 0.0, score_sum = 0.0, score_sq_sum = 0.0;
  for (const TieGroup& g : groups) {
    const double score = normal_quantile(g.midrank / (nd + 1.0));
    const double t = static_cast<double>(g.n1 + g.n2);
    statistic += static_cast<double>(g.n1) * score;
    score_sum += t * score;
    score_sq_sum += t * score * score;
  }
  const double score_mean = score_sum / nd;
  const double mean = static_cast<double>(n1) * score_mean;

  TestReport report;
  report.test_name = "normal-scores";
  report.statistic = statistic;
  report.n1 = n1;
  report.n2 = n2;
  report.alpha = alpha;

  if (n <= exact_max_n) {
    report.method = TestMethod::Exact;
    std::vector<double> scores;
    scores.reserve(n);
    for (const TieGroup& g : groups) {
      const double score = normal_quantile(g.midrank / (nd + 1.0));
      for (std::int64_t k = 0; k < g.n1 + g.n2; ++k) scores.push_back(score);
    }
    // Enumerate all C(n, n1) choices of sample-1 positions.
    std::vector<std::int64_t> idx(n1);
    for (std::int64_t i = 0; i < n1; ++i) idx[i] = i;
    const double target = std::abs(statistic - mean) - 1e-12;
    double extreme = 0.0, total = 0.0;
    while (true) {
      double t = 0.0;
      for (std::int64_t i : idx) t += scores[i];
      total += 1.0;
      if (std::abs(t - mean) >= target) extreme += 1.0;
      // next combination in lexicographic order
      std::int64_t i = n1 - 1;
      while (i >= 0 && idx[i] == n - n1 + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (std::int64_t j = i + 1; j < n1; ++j) idx[j] = idx[j - 1] + 1;
    }
    report.p_value = extreme / total;
  } else {
    report.method = TestMethod::Asymptotic;
    const double centered_sq = score_sq_sum - nd * score_mean * score_mean;
    const double var = static_cast<double>(n1) * static_cast<double>(n2) /
                       (nd * (nd - 1.0)) * centered_sq;
    if (var <= 0.0) {
      report.p_value = 1.0;
    } else {
      report.p_value = normal_two_sided(std::abs(statistic - mean) / std::sqrt(var));
    }
  }
  report.p_adjusted = report.p_value;
  report.reject = report.p_adjusted < alpha;
  return report;
}

TestReport chi2_homogeneity(const std::vector<std::vector<std::int64_t>>& counts,
                            double alpha) {
  // Drop empty rows, then pool low-expectation columns.
  std::vector<std::vector<std::int64_t>> rows;
  std::size_t n_cols = 0;
  for (const auto& row : counts) {
    std::int64_t total = 0;
    for (std::int64_t c : row) total += c;
    if (total > 0) {
      if (!rows.empty() && row.size() != n_cols) {
        throw DomainError("chi2_homogeneity: ragged count table");
      }
      n_cols = row.size();
      rows.push_back(row);
    }
  }
  if (rows.size() < 2) {
    throw InsufficientData("chi2_homogeneity: need at least two non-empty segments");
  }

  std::vector<std::size_t> active(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) active[c] = c;

  std::vector<std::int64_t> row_totals(rows.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::int64_t c : rows[r]) row_totals[r] += c;
  }
  std::int64_t grand = 0;
  for (std::int64_t t : row_totals) grand += t;

  auto col_total = [&](std::size_t c) {
    std::int64_t t = 0;
    for (const auto& row : rows) t += row[c];
    return t;
  };

  // Pool any category whose smallest expected cell is below 1 into its
  // lower-indexed neighbor (or the next one when it is leftmost).
  const std::int64_t min_row_total =
      *std::min_element(row_totals.begin(), row_totals.end());
  while (active.size() > 1) {
    std::size_t offender = active.size();
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double min_expected = static_cast<double>(col_total(active[k])) *
                                  static_cast<double>(min_row_total) /
                                  static_cast<double>(grand);
      if (min_expected < 1.0) {
        offender = k;
        break;
      }
    }
    if (offender == active.size()) break;
    const std::size_t neighbor = offender > 0 ? offender - 1 : offender + 1;
    for (auto& row : rows) {
      row[active[neighbor]] += row[active[offender]];
      row[active[offender]] = 0;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(offender));
  }
  if (active.size() < 2) {
    throw InsufficientData("chi2_homogeneity: pooling left a single category");
  }

  double x2 = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c : active) {
      const double expected = static_cast<double>(row_totals[r]) *
                              static_cast<double>(col_total(c)) /
                              static_cast<double>(grand);
      const double diff = static_cast<double>(rows[r][c]) - expected;
      x2 += diff * diff / expected;
    }
  }
  const double df = static_cast<double>((rows.size() - 1) * (active.size() - 1));

  TestReport report;
  report.test_name = "chi2-homogeneity";
  report.statistic = x2;
  report.method = TestMethod::Asymptotic;
  report.n1 = static_cast<std::int64_t>(rows.size());
  report.n2 = static_cast<std::int64_t>(active.size());
  report.alpha = alpha;
  report.p_value = chi2_survival(x2, df);
  report.p_adjusted = report.p_value;
  report.reject = report.p_adjusted < alpha;
  return report;
}

namespace {

// P(Fisher g > g_obs) for m periodogram ordinates. Exact alternating series
// in the small-p regime where it is numerically stable; independence
// approximation 1 - (1 - (1-g)^(m-1))^m for large p with many ordinates.
double fisher_g_pvalue(double g, std::int64_t m) {
  if (m <= 1) return 1.0;
  if (g >= 1.0) return 0.0;
  if (g <= 0.0) return 1.0;
  const double log_q = (static_cast<double>(m) - 1.0) * std::log1p(-g);
  const double first_term = std::exp(std::log(static_cast<double>(m)) + log_q);
  if (m > 50 && first_term > 0.1) {
    const double q = std::exp(log_q);
    return std::clamp(1.0 - std::exp(static_cast<double>(m) * std::log1p(-q)),
                      0.0, 1.0);
  }
  const std::int64_t j_max =
      std::min<std::int64_t>(m, static_cast<std::int64_t>(std::floor(1.0 / g)));
  long double acc = 0.0L;
  for (std::int64_t j = 1; j <= j_max; ++j) {
    const double jg = static_cast<double>(j) * g;
    if (jg >= 1.0) break;
    const double log_term =
        log_choose(m, j) + (static_cast<double>(m) - 1.0) * std::log1p(-jg);
    const long double term = std::exp(static_cast<long double>(log_term));
    acc += (j % 2 == 1) ? term : -term;
    if (term < 1e-18L * std::max(1.0L, std::abs(acc))) break;
  }
  return std::clamp(static_cast<double>(acc), 0.0, 1.0);
}

}  // namespace

PeriodogramResult periodogram(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 8) throw TooShort("periodogram: need at least 8 points");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = series[i] - mean;

  const std::size_t n_out = n / 2 + 1;
  fftw_complex* out = fftw_alloc_complex(n_out);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), out,
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  PeriodogramResult result;
  const std::size_t k_max = n / 2;  // Nyquist included for even n
  result.frequency.reserve(k_max);
  result.power.reserve(k_max);
  double total = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double re = out[k][0], im = out[k][1];
    const double power = (re * re + im * im) / static_cast<double>(n);
    result.frequency.push_back(static_cast<double>(k) / static_cast<double>(n));
    result.power.push_back(power);
    total += power;
  }
  fftw_free(out);

  if (total <= 0.0) {
    return result;  // constant input: zero spectrum, g = 0, p = 1
  }
  const auto it = std::max_element(result.power.begin(), result.power.end());
  const std::size_t arg = static_cast<std::size_t>(it - result.power.begin());
  result.dominant_frequency = result.frequency[arg];
  result.dominant_power = *it;
  result.fisher_g = *it / total;
  result.fisher_p =
      fisher_g_pvalue(result.fisher_g, static_cast<std::int64_t>(result.power.size()));
  return result;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return p_values[a] < p_values[b];
                   });
  std::vector<double> adjusted(m, 0.0);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double scaled = static_cast<double>(m - k) * p_values[order[k]];
    running = std::max(running, scaled);
    adjusted[order[k]] = std::min(1.0, running);
  }
  return adjusted;
}

namespace {

std::vector<double> as_doubles(const CategoricalSeries& s) {
  std::vector<double> v(s.values.begin(), s.values.end());
  return v;
}

struct PurityTask {
  std::string label_1, label_2;
  const CategoricalSeries* s1;
  const CategoricalSeries* s2;
};

}  // namespace

PurityProtocolResult purity_protocol(const CategoricalSeries& series,
                                     std::int64_t delta_t_ns,
                                     std::span<const ReductionSpec> procedures,
                                     double alpha, RandomStream& rng,
                                     int threads) {
  const auto segments = segment_by_time(series, delta_t_ns);
  if (segments.size() < 2) {
    throw InsufficientData("purity_protocol: need at least two time segments");
  }

  // Reduced samples S_i(j); thinning draws come from children of the passed
  // stream keyed by (segment, procedure) so evaluation order cannot matter.
  std::vector<CategoricalSeries> reduced;
  std::vector<std::pair<std::size_t, std::size_t>> reduced_key;
  reduced.reserve(segments.size() * procedures.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = 0; j < procedures.size(); ++j) {
      RandomStream child = rng.child(i * procedures.size() + j);
      reduced.push_back(reduce_intensity(segments[i], procedures[j], child));
      reduced_key.emplace_back(i, j);
    }
  }

  auto segment_label = [](std::size_t i) { return "S" + std::to_string(i + 1); };

  std::vector<PurityTask> tasks;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      tasks.push_back(PurityTask{segment_label(i), segment_label(j),
                                 &segments[i], &segments[j]});
    }
  }
  for (std::size_t k = 0; k < reduced.size(); ++k) {
    const auto [i, j] = reduced_key[k];
    if (reduced[k].values.empty()) continue;  // degenerate reduction
    tasks.push_back(PurityTask{
        segment_label(i), segment_label(i) + "(" + procedures[j].label() + ")",
        &segments[i], &reduced[k]});
  }

  // Three tests per pair, evaluated in parallel, assembled in task order.
  struct Slot {
    bool present = false;
    PurityTestEntry entry;
  };
  std::vector<Slot> slots(tasks.size() * 3);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const PurityTask& task = tasks[t];
      const auto v1 = as_doubles(*task.s1);
      const auto v2 = as_doubles(*task.s2);
      TestReport reports[3];
      bool ok[3] = {true, true, true};
      reports[0] = wmw_test(v1, v2, alpha);
      reports[1] = normal_scores_test(v1, v2, alpha);
      try {
        reports[2] =
            chi2_homogeneity({category_counts(*task.s1), category_counts(*task.s2)},
                             alpha);
      } catch (const InsufficientData&) {
        ok[2] = false;  // too thin to compare counts; rank tests still stand
      }
      for (int r = 0; r < 3; ++r) {
        if (!ok[r]) continue;
        Slot& slot = slots[t * 3 + static_cast<std::size_t>(r)];
        slot.present = true;
        slot.entry = PurityTestEntry{task.label_1, task.label_2, reports[r]};
      }
    }
  };
  if (threads <= 1 || tasks.size() < 2) {
    run_range(0, tasks.size());
  } else {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), tasks.size());
    const std::size_t chunk = (tasks.size() + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(tasks.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&run_range, begin, end] { run_range(begin, end); });
    }
    for (auto& th : pool) th.join();
  }

  PurityProtocolResult result;
  result.alpha = alpha;
  for (Slot& slot : slots) {
    if (slot.present) result.entries.push_back(std::move(slot.entry));
  }

  std::vector<double> raw;
  raw.reserve(result.entries.size());
  for (const auto& e : result.entries) raw.push_back(e.report.p_value);
  const auto adjusted = holm_adjust(raw);
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    result.entries[i].report.p_adjusted = adjusted[i];
    result.entries[i].report.reject = adjusted[i] < alpha;
    result.reject_h0 = result.reject_h0 || result.entries[i].report.reject;
  }
  return result;
}

}  // namespace spce
