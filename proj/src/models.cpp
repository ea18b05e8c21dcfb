#include "spce/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "spce/errors.hpp"

namespace spce {

namespace {

constexpr double kPi = std::numbers::pi;

int sign_pm(double v) { return v >= 0.0 ? +1 : -1; }

Outcome to_outcome(int s) { return s > 0 ? Outcome::Plus : Outcome::Minus; }

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

double qt_correlation(const Direction& a, const Direction& b) {
  // -cos(angle(a,b)) computed directly from the clamped dot product.
  return -clamp_unit(dot(a, b));
}

JointProbs singlet_joint_probs(double theta) {
  const double c = std::cos(theta);
  return JointProbs{(1.0 - c) / 4.0, (1.0 + c) / 4.0, (1.0 + c) / 4.0,
                    (1.0 - c) / 4.0};
}

OutcomePair sample_joint(const JointProbs& probs, RandomStream& rng) {
  const double u = rng.uniform();
  if (u < probs.p_pp) return {Outcome::Plus, Outcome::Plus};
  if (u < probs.p_pp + probs.p_pm) return {Outcome::Plus, Outcome::Minus};
  if (u < probs.p_pp + probs.p_pm + probs.p_mp) return {Outcome::Minus, Outcome::Plus};
  return {Outcome::Minus, Outcome::Minus};
}

MonteCarloEstimate smeared_correlation(const CapSpec& cap_a, const CapSpec& cap_b,
                                       std::size_t n_samples, RandomStream& rng) {
  if (cap_a.epsilon == 0.0 && cap_b.epsilon == 0.0) {
    // Delta caps: the integral collapses to the sharp correlation.
    return MonteCarloEstimate{qt_correlation(cap_a.center, cap_b.center), 0.0};
  }
  if (n_samples == 0) {
    throw DomainError("smeared_correlation: n_samples must be positive");
  }
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Direction a = sample_cap(cap_a, rng);
    const Direction b = sample_cap(cap_b, rng);
    const double v = -clamp_unit(dot(a, b));
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  return MonteCarloEstimate{mean, std::sqrt(var / n)};
}

MonteCarloEstimate lrhv_correlation(const LrhvModel& model, const Direction& a,
                                    const Direction& b, std::size_t n_samples,
                                    RandomStream& rng) {
  if (n_samples == 0) {
    throw DomainError("lrhv_correlation: n_samples must be positive");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Direction lambda = model.sample_lambda(rng);
    sum += model.response_a(lambda, a) * model.response_b(lambda, b);
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  // Products are +-1, so Var = 1 - mean^2.
  const double var = std::max(0.0, 1.0 - mean * mean);
  return MonteCarloEstimate{mean, std::sqrt(var / n)};
}

namespace {

// Abscissas/weights of 4-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGl4X = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
    0.8611363115940526};
constexpr std::array<double, 4> kGl4W = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
    0.3478548451374538};

// Azimuthal average of f(phi) in {-1,+1} over [0, 2pi). Probes a coarse
// grid, then bisects every interval whose endpoints disagree until the jump
// position is resolved to machine precision. Exact for piecewise-constant
// integrands with fewer jumps than probes.
template <typename F>
double ring_average(const F& f, int probes, int bisect_iterations) {
  const double step = 2.0 * kPi / probes;
  double signed_arc = 0.0;
  int prev = f(0.0);
  const int first = prev;
  double prev_phi = 0.0;
  for (int k = 1; k <= probes; ++k) {
    const double phi = k * step;
    const int cur = (k == probes) ? first : f(phi);
    if (cur == prev) {
      continue;
    }
    // Locate the jump in (prev_phi_probe, phi).
    double lo = phi - step, hi = phi;
    for (int it = 0; it < bisect_iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) == prev) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double jump = 0.5 * (lo + hi);
    signed_arc += prev * (jump - prev_phi);
    prev_phi = jump;
    prev = cur;
  }
  signed_arc += prev * (2.0 * kPi - prev_phi);
  return signed_arc / (2.0 * kPi);
}

}  // namespace

double lrhv_quadrature_correlation(const LrhvModel& model, const Direction& a,
                                   const Direction& b,
                                   const LrhvQuadratureOptions& opts) {
  if (model.lambda_density != LambdaDensity::UniformSphere) {
    throw DomainError("lrhv_quadrature_correlation: unsupported lambda density");
  }
  // Uniform measure in (t, phi) with t = lambda_z: composite Gauss-Legendre
  // over t, jump-resolved azimuthal averages per ring.
  double acc = 0.0;
  const double panel_width = 2.0 / opts.polar_panels;
  for (int p = 0; p < opts.polar_panels; ++p) {
    const double t0 = -1.0 + p * panel_width;
    for (std::size_t q = 0; q < kGl4X.size(); ++q) {
      const double t = t0 + 0.5 * panel_width * (1.0 + kGl4X[q]);
      const double w = 0.5 * panel_width * kGl4W[q];
      const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
      auto f = [&](double phi) -> int {
        const Direction lambda = Direction::normalized(s * std::cos(phi),
                                                       s * std::sin(phi), t);
        return model.response_a(lambda, a) * model.response_b(lambda, b);
      };
      acc += w * ring_average(f, opts.azimuth_probes, opts.bisect_iterations);
    }
  }
  return acc / 2.0;  // measure dt/2 on [-1, 1]
}

LrhvModel lrhv_linear_model() {
  LrhvModel m;
  m.lambda_density = LambdaDensity::UniformSphere;
  m.sample_lambda = [](RandomStream& rng) { return sample_unit_sphere(rng); };
  m.response_a = [](const Direction& lambda, const Direction& dir) {
    return sign_pm(dot(lambda, dir));
  };
  m.response_b = [](const Direction& lambda, const Direction& dir) {
    return -sign_pm(dot(lambda, dir));
  };
  return m;
}

std::vector<std::pair<std::string, LrhvModel>> lrhv_registry() {
  std::vector<std::pair<std::string, LrhvModel>> reg;
  reg.emplace_back("lrhv-linear", lrhv_linear_model());

  // Aligned variant: both sides respond with the same sign convention.
  {
    LrhvModel m = lrhv_linear_model();
    m.response_b = m.response_a;
    reg.emplace_back("lrhv-aligned", m);
  }

  // Band variant: outcome depends on how close lambda lies to the analyzer
  // plane; still deterministic two-valued, so the CHSH bound applies.
  {
    LrhvModel m = lrhv_linear_model();
    auto band = [](const Direction& lambda, const Direction& dir) {
      return std::abs(dot(lambda, dir)) >= 0.5 ? +1 : -1;
    };
    m.response_a = band;
    m.response_b = [band](const Direction& lambda, const Direction& dir) {
      return -band(lambda, dir);
    };
    reg.emplace_back("lrhv-band", m);
  }
  return reg;
}

OutcomePair contextual_pair(const ContextualModel& model, const CapSpec& cap_a,
                            const CapSpec& cap_b, RandomStream& rng) {
  // Draw order is part of the determinism contract: lambda pair, then the
  // microscopic directions, then the local responses.
  const auto [lambda1, lambda2] = model.sample_lambda_pair(rng, cap_a, cap_b);
  const Direction a = sample_cap(cap_a, rng);
  const Direction b = sample_cap(cap_b, rng);
  const Outcome out_a = model.response_a(lambda1, a, rng);
  const Outcome out_b = model.response_b(lambda2, b, rng);
  return {out_a, out_b};
}

ContextualModel detection_rejection_model() {
  ContextualModel m;
  m.mechanism = ContextMechanism::DetectionRejection;
  m.sample_lambda_pair = [](RandomStream& rng, const CapSpec&, const CapSpec&) {
    const Direction lambda = sample_unit_sphere(rng);
    const Direction anti = Direction::normalized(-lambda.x(), -lambda.y(), -lambda.z());
    return std::make_pair(HiddenValue{lambda, 0.0}, HiddenValue{anti, 0.0});
  };
  m.response_a = [](const HiddenValue& h, const Direction& dir, RandomStream&) {
    return to_outcome(sign_pm(dot(h.axis, dir)));
  };
  // Rejection tuned so that post-selected coincidences reproduce -cos(theta):
  // detect with probability |lambda2 . b|, a function of the local hidden
  // value and the local direction only.
  m.response_b = [](const HiddenValue& h, const Direction& dir, RandomStream& rng) {
    const double proj = dot(h.axis, dir);
    if (!rng.bernoulli(std::abs(proj))) {
      return Outcome::NoDetect;
    }
    return to_outcome(sign_pm(proj));
  };
  return m;
}

ContextualModel setting_dependent_lambda_model() {
  ContextualModel m;
  m.mechanism = ContextMechanism::SettingDependentLambda;
  // The hidden-variable distribution is specific to the analyzer pair: the
  // sampler sees both macroscopic settings and predetermines the outcomes
  // with the singlet table at their angle.
  m.sample_lambda_pair = [](RandomStream& rng, const CapSpec& cap_a,
                            const CapSpec& cap_b) {
    const double theta = angle_between(cap_a.center, cap_b.center);
    const auto [oa, ob] = sample_joint(singlet_joint_probs(theta), rng);
    HiddenValue h1, h2;
    h1.scalar = static_cast<double>(static_cast<int>(oa));
    h2.scalar = static_cast<double>(static_cast<int>(ob));
    return std::make_pair(h1, h2);
  };
  auto report = [](const HiddenValue& h, const Direction&, RandomStream&) {
    return h.scalar > 0.0 ? Outcome::Plus : Outcome::Minus;
  };
  m.response_a = report;
  m.response_b = report;
  return m;
}

namespace {

PairGenerator qt_ideal_generator() {
  return [](const CapSpec& cap_a, const CapSpec& cap_b, RandomStream& rng) {
    const double theta = angle_between(cap_a.center, cap_b.center);
    return sample_joint(singlet_joint_probs(theta), rng);
  };
}

PairGenerator qt_smeared_generator() {
  return [](const CapSpec& cap_a, const CapSpec& cap_b, RandomStream& rng) {
    const Direction a = sample_cap(cap_a, rng);
    const Direction b = sample_cap(cap_b, rng);
    return sample_joint(singlet_joint_probs(angle_between(a, b)), rng);
  };
}

PairGenerator lrhv_generator(LrhvModel model) {
  return [model = std::move(model)](const CapSpec& cap_a, const CapSpec& cap_b,
                                    RandomStream& rng) {
    const Direction lambda = model.sample_lambda(rng);
    const Direction a = sample_cap(cap_a, rng);
    const Direction b = sample_cap(cap_b, rng);
    return OutcomePair{to_outcome(model.response_a(lambda, a)),
                       to_outcome(model.response_b(lambda, b))};
  };
}

PairGenerator contextual_generator(ContextualModel model) {
  return [model = std::move(model)](const CapSpec& cap_a, const CapSpec& cap_b,
                                    RandomStream& rng) {
    return contextual_pair(model, cap_a, cap_b, rng);
  };
}

}  // namespace

PairGenerator make_pair_generator(const std::string& model_id) {
  if (model_id == "qt-ideal") return qt_ideal_generator();
  if (model_id == "qt-smeared") return qt_smeared_generator();
  if (model_id == "lrhv-linear") return lrhv_generator(lrhv_linear_model());
  if (model_id == "ctx-rejection") {
    return contextual_generator(detection_rejection_model());
  }
  if (model_id == "ctx-setting-lambda") {
    return contextual_generator(setting_dependent_lambda_model());
  }
  throw UnknownModel("unknown model id: " + model_id);
}

const std::vector<std::string>& known_model_ids() {
  static const std::vector<std::string> ids = {
      "qt-ideal", "qt-smeared", "lrhv-linear", "ctx-rejection",
      "ctx-setting-lambda"};
  return ids;
}

}  // namespace spce
