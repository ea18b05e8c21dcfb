#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spce/geometry.hpp"
#include "spce/rng.hpp"

namespace spce {

// Single-side measurement result. NoDetect is a first-class third outcome so
// detection-rate anomalies stay observable downstream instead of being
// silently dropped.
enum class Outcome : int { Minus = -1, NoDetect = 0, Plus = +1 };

using OutcomePair = std::pair<Outcome, Outcome>;

// Joint +-1 outcome table for one analyzer-angle pair.
struct JointProbs {
  double p_pp, p_pm, p_mp, p_mm;

  double correlation() const { return p_pp + p_mm - p_pm - p_mp; }
  double sum() const { return p_pp + p_pm + p_mp + p_mm; }
};

// Ideal singlet correlation for sharp analyzer directions: -cos(theta_ab).
double qt_correlation(const Direction& a, const Direction& b);

// Outcome table consistent with E(theta) = -cos(theta) and uniform +-1/2
// marginals on both sides:
//   p_pp = p_mm = (1 - cos theta)/4,  p_pm = p_mp = (1 + cos theta)/4.
JointProbs singlet_joint_probs(double theta);

// One draw from a joint table.
OutcomePair sample_joint(const JointProbs& probs, RandomStream& rng);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Correlation for analyzers that are caps rather than sharp directions:
// the average of -a.b over microscopic a ~ rho_A, b ~ rho_B. Monte Carlo
// with standard error; the delta-cap case (both epsilon 0) is returned
// exactly with zero noise.
MonteCarloEstimate smeared_correlation(const CapSpec& cap_a, const CapSpec& cap_b,
                                       std::size_t n_samples, RandomStream& rng);

// Hidden-variable density supported on the unit sphere. Only the uniform
// density is shipped; the tag exists so the quadrature below can check the
// assumption it integrates under.
enum class LambdaDensity { UniformSphere };

// Local deterministic hidden-variable model: a shared lambda drawn from a
// setting-independent distribution, and per-side response functions mapping
// (lambda, analyzer direction) to +-1. Responses must be deterministic and
// strictly two-valued.
struct LrhvModel {
  LambdaDensity lambda_density = LambdaDensity::UniformSphere;
  std::function<Direction(RandomStream&)> sample_lambda;
  std::function<int(const Direction& lambda, const Direction& dir)> response_a;
  std::function<int(const Direction& lambda, const Direction& dir)> response_b;
};

// Empirical correlation: the mean of A(lambda,a)*B(lambda,b) over i.i.d.
// lambda draws, with its standard error.
MonteCarloEstimate lrhv_correlation(const LrhvModel& model, const Direction& a,
                                    const Direction& b, std::size_t n_samples,
                                    RandomStream& rng);

struct LrhvQuadratureOptions {
  // Polar axis split into panels with 4-point Gauss-Legendre each; on each
  // polar ring the +-1-valued integrand is resolved by locating its jumps in
  // azimuth with bisection, which makes the azimuthal integral exact to
  // machine precision for piecewise-constant responses.
  int polar_panels = 1024;
  int azimuth_probes = 128;
  int bisect_iterations = 52;
};

// Deterministic dense-quadrature evaluation of the model correlation
// integral over the uniform sphere. Used to check model correlations (and
// the CHSH combination built from them) without Monte Carlo noise.
double lrhv_quadrature_correlation(const LrhvModel& model, const Direction& a,
                                   const Direction& b,
                                   const LrhvQuadratureOptions& opts = {});

// Bell's linear model: lambda uniform on the sphere, A = sign(lambda.a),
// B = -sign(lambda.b). Exact correlation is -1 + 2*theta/pi.
LrhvModel lrhv_linear_model();

// All local-deterministic models shipped with the toolkit, keyed by name.
// Every entry satisfies the CHSH bound 2 by construction.
std::vector<std::pair<std::string, LrhvModel>> lrhv_registry();

// Hidden value carried by one side of a contextual model. Interpretation is
// model-specific: the rejection model stores an axis, the setting-dependent
// model a predetermined +-1 in `scalar`.
struct HiddenValue {
  Direction axis{0.0, 0.0, 1.0};
  double scalar = 0.0;
};

enum class ContextMechanism { SettingDependentLambda, DetectionRejection };

// Locally causal model whose hidden-variable description is allowed to
// depend on the experiment's analyzer pair: either the lambda-pair sampler
// sees the settings, or detection is rejected with a probability depending
// on (lambda, local direction). Responses see only the local hidden value
// and the local microscopic direction.
struct ContextualModel {
  ContextMechanism mechanism = ContextMechanism::DetectionRejection;
  std::function<std::pair<HiddenValue, HiddenValue>(
      RandomStream&, const CapSpec& cap_a, const CapSpec& cap_b)>
      sample_lambda_pair;
  std::function<Outcome(const HiddenValue&, const Direction&, RandomStream&)>
      response_a;
  std::function<Outcome(const HiddenValue&, const Direction&, RandomStream&)>
      response_b;
};

// One pair draw: sample (lambda1, lambda2), sample microscopic directions
// from the caps, apply the local responses. NoDetect outcomes are preserved
// for downstream post-selection.
OutcomePair contextual_pair(const ContextualModel& model, const CapSpec& cap_a,
                            const CapSpec& cap_b, RandomStream& rng);

// Reference rejection model: shared axis lambda uniform on the sphere,
// (lambda1, lambda2) = (lambda, -lambda), outcome sign(lambda_i . d); side B
// detects with probability |lambda2 . b|. Post-selected coincidences
// reproduce -cos(theta) exactly, at an overall B-side efficiency of 1/2.
ContextualModel detection_rejection_model();

// Reference setting-dependent model: the lambda-pair sampler sees the
// macroscopic analyzer pair and draws predetermined outcomes from the
// singlet table at the macroscopic angle; responses just report them.
ContextualModel setting_dependent_lambda_model();

// Generator of one outcome pair given the two analyzer caps; the unit the
// simulation layer drives. Must consume randomness only from the passed
// stream.
using PairGenerator =
    std::function<OutcomePair(const CapSpec&, const CapSpec&, RandomStream&)>;

// Resolves a model identifier ("qt-ideal", "qt-smeared", "lrhv-linear",
// "ctx-rejection", "ctx-setting-lambda") to its generator.
// Throws UnknownModel for anything else.
PairGenerator make_pair_generator(const std::string& model_id);

const std::vector<std::string>& known_model_ids();

}  // namespace spce
