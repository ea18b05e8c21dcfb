#include "spce/estimators.hpp"

#include <cmath>

#include "spce/errors.hpp"

namespace spce {

CorrelationEstimate estimate_correlation(std::span<const PairOutcome> pairs) {
  CorrelationEstimate est;
  for (const PairOutcome& p : pairs) {
    if (p.a == Outcome::NoDetect || p.b == Outcome::NoDetect) continue;
    if (p.a == Outcome::Plus) {
      (p.b == Outcome::Plus ? est.n_pp : est.n_pm)++;
    } else {
      (p.b == Outcome::Plus ? est.n_mp : est.n_mm)++;
    }
  }
  est.n_coincidences = est.n_pp + est.n_pm + est.n_mp + est.n_mm;
  if (est.n_coincidences == 0) {
    return est;  // flagged empty; callers decide whether that is an error
  }
  const double n = static_cast<double>(est.n_coincidences);
  est.e_hat = static_cast<double>(est.n_pp + est.n_mm - est.n_pm - est.n_mp) / n;
  est.std_err = std::sqrt(std::max(0.0, 1.0 - est.e_hat * est.e_hat) / n);
  return est;
}

std::vector<PairOutcome> outcomes_from_matches(const MatchResult& matches) {
  std::vector<PairOutcome> pairs;
  pairs.reserve(matches.matched.size());
  for (const MatchedPair& m : matches.matched) {
    pairs.push_back(PairOutcome{m.a.outcome > 0 ? Outcome::Plus : Outcome::Minus,
                                m.b.outcome > 0 ? Outcome::Plus : Outcome::Minus});
  }
  return pairs;
}

ChshResult chsh(const CorrelationEstimate& e_ab, const CorrelationEstimate& e_abp,
                const CorrelationEstimate& e_apbp, const CorrelationEstimate& e_apb,
                double bound, double decision_sigmas) {
  const CorrelationEstimate* parts[4] = {&e_ab, &e_abp, &e_apbp, &e_apb};
  for (const auto* p : parts) {
    if (p->empty()) {
      throw EmptyEstimate("chsh: component estimate has zero coincidences");
    }
  }
  ChshResult r;
  r.components[0] = e_ab;
  r.components[1] = e_abp;
  r.components[2] = e_apbp;
  r.components[3] = e_apb;
  r.s_value = std::abs(e_ab.e_hat - e_abp.e_hat) +
              std::abs(e_apbp.e_hat + e_apb.e_hat);
  r.s_std_err = std::sqrt(e_ab.std_err * e_ab.std_err +
                          e_abp.std_err * e_abp.std_err +
                          e_apbp.std_err * e_apbp.std_err +
                          e_apb.std_err * e_apb.std_err);
  r.bound = bound;
  r.decision_sigmas = decision_sigmas;
  r.violated = r.s_value - decision_sigmas * r.s_std_err > bound;
  return r;
}

double larsson_gill_bound(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw DomainError("larsson_gill_bound: delta must lie in [0, 1]");
  }
  return 4.0 - 2.0 * delta;
}

RateRow tally_run(const std::string& run_id, const MatchResult& matches,
                  const std::vector<EventRecord>& stream_a,
                  const std::vector<EventRecord>& stream_b) {
  RateRow row;
  row.run_id = run_id;
  row.events_a = static_cast<std::int64_t>(stream_a.size());
  row.events_b = static_cast<std::int64_t>(stream_b.size());
  row.coincidences = static_cast<std::int64_t>(matches.matched.size());
  if (!stream_a.empty()) row.setting_a = stream_a.front().setting;
  if (!stream_b.empty()) row.setting_b = stream_b.front().setting;
  // Duration from the union time span of both streams.
  std::int64_t t_min = 0, t_max = 0;
  bool any = false;
  for (const auto* s : {&stream_a, &stream_b}) {
    if (s->empty()) continue;
    const std::int64_t lo = s->front().time_ns, hi = s->back().time_ns;
    if (!any) {
      t_min = lo;
      t_max = hi;
      any = true;
    } else {
      t_min = std::min(t_min, lo);
      t_max = std::max(t_max, hi);
    }
  }
  row.duration_s = any ? static_cast<double>(t_max - t_min) / 1e9 : 0.0;
  return row;
}

RateSummary rate_summary(std::span<const RateRow> rows, double threshold_sigmas) {
  RateSummary summary;
  summary.threshold_sigmas = threshold_sigmas;
  for (const RateRow& in : rows) {
    if (in.events_a == 0 && in.events_b == 0) continue;
    RateRow row = in;
    if (row.duration_s > 0.0) {
      row.singles_rate_a_hz = static_cast<double>(row.events_a) / row.duration_s;
      row.singles_rate_b_hz = static_cast<double>(row.events_b) / row.duration_s;
      row.coincidence_rate_hz =
          static_cast<double>(row.coincidences) / row.duration_s;
    }
    row.detected_fraction_a =
        row.events_a > 0
            ? static_cast<double>(row.coincidences) / static_cast<double>(row.events_a)
            : 0.0;
    row.detected_fraction_b =
        row.events_b > 0
            ? static_cast<double>(row.coincidences) / static_cast<double>(row.events_b)
            : 0.0;
    summary.rows.push_back(std::move(row));
  }

  // Singles rates per side should not depend on the settings; compare every
  // pair of runs with Poisson errors sqrt(N)/T.
  auto scan_side = [&](char side) {
    for (std::size_t i = 0; i < summary.rows.size(); ++i) {
      for (std::size_t j = i + 1; j < summary.rows.size(); ++j) {
        const RateRow& r1 = summary.rows[i];
        const RateRow& r2 = summary.rows[j];
        if (r1.duration_s <= 0.0 || r2.duration_s <= 0.0) continue;
        const double n1 = static_cast<double>(side == 'A' ? r1.events_a : r1.events_b);
        const double n2 = static_cast<double>(side == 'A' ? r2.events_a : r2.events_b);
        if (n1 == 0.0 && n2 == 0.0) continue;
        const double rate1 = n1 / r1.duration_s;
        const double rate2 = n2 / r2.duration_s;
        const double var = n1 / (r1.duration_s * r1.duration_s) +
                           n2 / (r2.duration_s * r2.duration_s);
        if (var <= 0.0) continue;
        const double z = std::abs(rate1 - rate2) / std::sqrt(var);
        if (z > threshold_sigmas) {
          summary.flags.push_back(
              RateAnomaly{side, r1.run_id, r2.run_id, rate1, rate2, z});
        }
      }
    }
  };
  scan_side('A');
  scan_side('B');
  return summary;
}

}  // namespace spce
