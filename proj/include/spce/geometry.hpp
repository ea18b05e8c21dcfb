#pragma once

#include <cmath>

#include "spce/errors.hpp"
#include "spce/rng.hpp"

namespace spce {

// Unit vector on S^2. Constructors validate; everything downstream may
// assume |v| = 1 to within 1e-12.
class Direction {
 public:
  Direction(double x, double y, double z) : x_(x), y_(y), z_(z) {
    const double n2 = x_ * x_ + y_ * y_ + z_ * z_;
    if (std::abs(n2 - 1.0) > 1e-9) {
      throw DomainError("Direction: components are not unit-normalized");
    }
    const double inv = 1.0 / std::sqrt(n2);
    x_ *= inv;
    y_ *= inv;
    z_ *= inv;
  }

  // Builds from an arbitrary non-zero vector.
  static Direction normalized(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (n == 0.0 || !std::isfinite(n)) {
      throw DomainError("Direction: cannot normalize zero or non-finite vector");
    }
    return Direction(x / n, y / n, z / n, Unchecked{});
  }

  // Analyzer orientation at angle alpha (radians) in the x-y plane.
  static Direction from_plane_angle(double alpha) {
    return Direction(std::cos(alpha), std::sin(alpha), 0.0, Unchecked{});
  }

  static Direction x_axis() { return Direction(1, 0, 0, Unchecked{}); }
  static Direction y_axis() { return Direction(0, 1, 0, Unchecked{}); }
  static Direction z_axis() { return Direction(0, 0, 1, Unchecked{}); }

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

 private:
  struct Unchecked {};
  Direction(double x, double y, double z, Unchecked) : x_(x), y_(y), z_(z) {}
  friend Direction sample_cap(const struct CapSpec&, RandomStream&);
  friend Direction sample_unit_sphere(RandomStream&);

  double x_, y_, z_;
};

inline double dot(const Direction& a, const Direction& b) {
  return a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
}

// Angle between two unit vectors, in [0, pi]. The dot product is clamped
// before acos to kill floating-point domain errors.
inline double angle_between(const Direction& a, const Direction& b) {
  double c = dot(a, b);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

enum class CapDistribution { UniformSolidAngle };

// Spherical cap {d in S^2 : 1 - d.center <= epsilon} with a sampling
// distribution on it. epsilon = 0 is a delta at the center; epsilon = 2
// covers the full sphere.
struct CapSpec {
  Direction center;
  double epsilon = 0.0;
  CapDistribution distribution = CapDistribution::UniformSolidAngle;

  CapSpec(Direction c, double eps,
          CapDistribution dist = CapDistribution::UniformSolidAngle)
      : center(c), epsilon(eps), distribution(dist) {
    if (!(eps >= 0.0 && eps <= 2.0)) {
      throw DomainError("CapSpec: epsilon must lie in [0, 2]");
    }
  }
};

// Uniform-by-solid-angle draw from the cap. Uses the fact that for an
// isotropic measure the polar coordinate t = 1 - d.center is uniform on
// [0, epsilon]; azimuth is uniform. No rejection loop.
Direction sample_cap(const CapSpec& spec, RandomStream& rng);

// Isotropic draw from the full sphere (equivalent to a cap with epsilon 2).
Direction sample_unit_sphere(RandomStream& rng);

}  // namespace spce
