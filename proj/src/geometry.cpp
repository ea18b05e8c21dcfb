#include "spce/geometry.hpp"

#include <numbers>

namespace spce {

namespace {

// Orthonormal pair spanning the plane perpendicular to n. Reference axis is
// the coordinate axis least aligned with n, so the cross product is well
// conditioned everywhere on the sphere.
struct Basis {
  double e1x, e1y, e1z;
  double e2x, e2y, e2z;
};

Basis perpendicular_basis(const Direction& n) {
  double rx = 0, ry = 0, rz = 0;
  const double ax = std::abs(n.x()), ay = std::abs(n.y()), az = std::abs(n.z());
  if (ax <= ay && ax <= az) {
    rx = 1;
  } else if (ay <= az) {
    ry = 1;
  } else {
    rz = 1;
  }
  // e1 = normalize(r x n), e2 = n x e1
  double e1x = ry * n.z() - rz * n.y();
  double e1y = rz * n.x() - rx * n.z();
  double e1z = rx * n.y() - ry * n.x();
  const double inv = 1.0 / std::sqrt(e1x * e1x + e1y * e1y + e1z * e1z);
  e1x *= inv;
  e1y *= inv;
  e1z *= inv;
  const double e2x = n.y() * e1z - n.z() * e1y;
  const double e2y = n.z() * e1x - n.x() * e1z;
  const double e2z = n.x() * e1y - n.y() * e1x;
  return Basis{e1x, e1y, e1z, e2x, e2y, e2z};
}

}  // namespace

Direction sample_cap(const CapSpec& spec, RandomStream& rng) {
  if (spec.epsilon == 0.0) {
    return spec.center;
  }
  // t = 1 - cos(polar angle) uniform on [0, epsilon]; azimuth uniform.
  const double t = spec.epsilon * rng.uniform();
  const double c = 1.0 - t;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double sp = std::sin(phi), cp = std::cos(phi);
  const Basis b = perpendicular_basis(spec.center);
  double x = s * cp * b.e1x + s * sp * b.e2x + c * spec.center.x();
  double y = s * cp * b.e1y + s * sp * b.e2y + c * spec.center.y();
  double z = s * cp * b.e1z + s * sp * b.e2z + c * spec.center.z();
  const double inv = 1.0 / std::sqrt(x * x + y * y + z * z);
  return Direction(x * inv, y * inv, z * inv, Direction::Unchecked{});
}

Direction sample_unit_sphere(RandomStream& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  double x = s * std::cos(phi);
  double y = s * std::sin(phi);
  const double inv = 1.0 / std::sqrt(x * x + y * y + z * z);
  return Direction(x * inv, y * inv, z * inv, Direction::Unchecked{});
}

}  // namespace spce
