#include "gyro/filters.hpp"

#include <cmath>
#include <string>

#include "gyro/errors.hpp"

namespace gyro {

Mat3 hat(const Vec3& b) {
  Mat3 m;
  m(0, 1) = -b.z;
  m(0, 2) = b.y;
  m(1, 0) = b.z;
  m(1, 2) = -b.x;
  m(2, 0) = -b.y;
  m(2, 1) = b.x;
  return m;
}

Projections projections(const Vec3& b0) {
  Projections p;
  p.par = outer(b0, b0);
  p.perp = Mat3::identity() - p.par;
  return p;
}

double tanc(double x) { return x == 0.0 ? 1.0 : std::tan(x) / x; }
double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

FilterPair filter_pair(double h, double eps, const Vec3& b0) {
  const double th = 0.5 * h / eps;
  const double c = std::cos(th);        // pole of tan(th)
  const double s2 = std::sin(2.0 * th); // pole of 1/sinc(2 th)
  constexpr double kDenomFloor = 1e-8;
  if (std::abs(c) < kDenomFloor)
    throw ResonanceError("filter_pair: h/(2 eps) within 1e-8 of a tan pole", std::abs(c), 1);
  if (std::abs(s2) < kDenomFloor)
    throw ResonanceError("filter_pair: h/eps within 1e-8 of a sin zero", std::abs(s2), 1);

  const Mat3 hat2 = outer(b0, b0) - Mat3::identity();  // hat(b0)^2 for unit b0
  FilterPair f;
  f.psi = Mat3::identity() + (1.0 - tanc(th)) * hat2;
  f.phi = Mat3::identity() + (1.0 - 1.0 / sinc(2.0 * th)) * hat2;
  f.phi_inv = Mat3::identity() + (1.0 - sinc(2.0 * th)) * hat2;
  return f;
}

Mat3 rotation_about(const Vec3& axis, double theta) {
  const Mat3 k = hat(axis);
  return Mat3::identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
}

double boris_rotation_angle(double h, double eps) { return 2.0 * std::atan(0.5 * h / eps); }

ResonanceMargin resonance_margin(double h, double eps, int N, double tan_floor) {
  const double th = 0.5 * h / eps;
  double margin = HUGE_VAL;
  int worst = 0;
  const double c1 = std::abs(std::cos(th));
  const double t1 = std::tan(th);
  for (int k = 1; k <= N; ++k) {
    const double s = std::abs(std::sin(k * th));
    const double c = std::abs(std::cos(k * th));
    if (s < margin) { margin = s; worst = k; }
    if (c < margin) { margin = c; worst = k; }
    if (k >= 2 && c >= tan_floor && c1 >= tan_floor) {
      const double d = std::abs(std::tan(k * th) - t1);
      if (d < margin) { margin = d; worst = k; }
    }
  }
  return {margin, worst};
}

}  // namespace gyro
