#include "vims/world.hpp"

#include <cmath>

namespace vims {

namespace {

constexpr double kMu0 = 4.0e-7 * M_PI;  // T*m/A

// Orthonormal basis with the given unit z axis.
void basis_from_axis(const Vec3& z, Vec3& x, Vec3& y) {
  const Vec3 pick = std::abs(z.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  x = pick.cross(z).normalized();
  y = z.cross(x);
}

}  // namespace

// Off-axis field of a circular loop via complete elliptic integrals
// (Simpson's analytic expressions), evaluated in a coil-aligned frame and
// rotated back to world.
Vec3 coil_field(const CoilSpec& coil, const Vec3& p) {
  const Vec3 axis = coil.axis.normalized();
  Vec3 ex, ey;
  basis_from_axis(axis, ex, ey);

  const Vec3 d = p - coil.center;
  const double x = d.dot(ex);
  const double y = d.dot(ey);
  const double z = d.dot(axis);

  const double a = coil.radius;
  const double rho = std::hypot(x, y);
  const double wire_dist = std::hypot(rho - a, z);
  if (wire_dist < 0.01) {
    throw std::domain_error("coil_field: point within 1 cm of the coil wire");
  }

  const double current = coil.current_amplitude * static_cast<double>(coil.turns);
  const double r2 = rho * rho + z * z;
  const double alpha2 = a * a + r2 - 2.0 * a * rho;
  const double beta = std::sqrt(a * a + r2 + 2.0 * a * rho);
  const double k2 = 1.0 - alpha2 / (beta * beta);
  const double k = std::sqrt(std::max(0.0, k2));

  const double eK = std::comp_ellint_1(k);
  const double eE = std::comp_ellint_2(k);

  const double c = kMu0 * current / M_PI;
  const double fac = c / (2.0 * alpha2 * beta);

  double b_rho = 0.0;
  if (rho > 1e-9 * a) {
    b_rho = fac * (z / rho) * ((a * a + r2) * eE - alpha2 * eK);
  }
  const double b_z = fac * ((a * a - r2) * eE + alpha2 * eK);

  Vec3 field = b_z * axis;
  if (rho > 1e-9 * a) {
    const Vec3 rho_hat = (x * ex + y * ey) / rho;
    field += b_rho * rho_hat;
  }
  return field;
}

}  // namespace vims
