#pragma once

#include <utility>

#include "gyro/vec3.hpp"

namespace gyro {

// Cross-product matrix: hat(b)*v = b x v, so v x b = -hat(b)*v.
Mat3 hat(const Vec3& b);

// Orthogonal projectors onto span(b0) and its complement; b0 must be unit.
struct Projections {
  Mat3 par;   // b0 b0^T
  Mat3 perp;  // I - b0 b0^T
};
Projections projections(const Vec3& b0);

// tan(x)/x and sin(x)/x with the removable singularity filled in.
double tanc(double x);
double sinc(double x);

// Velocity-space filters for the filtered variational method.
//   psi = I + (1 - tanc(h/2eps)) * hat(b0)^2
//   phi = I + (1 - 1/sinc(h/eps)) * hat(b0)^2
// Both are symmetric and fix b0. phi_inv is the exact inverse of phi.
// Throws ResonanceError when h/(2 eps) sits on a pole of tan or 1/sin
// (denominator below 1e-8).
struct FilterPair {
  Mat3 psi;
  Mat3 phi;
  Mat3 phi_inv;
};
FilterPair filter_pair(double h, double eps, const Vec3& b0);

// Rodrigues rotation about a unit axis by angle theta.
Mat3 rotation_about(const Vec3& axis, double theta);

// Per-step rotation angle of the Boris kernel in a field of magnitude 1/eps.
double boris_rotation_angle(double h, double eps);

// Distance of h/(2 eps) from the resonances that degrade the filtered method:
// min over k=1..N of |sin(k th)|, |cos(k th)| and over k=2..N of
// |tan(k th) - tan(th)| (tan terms skipped where the matching cos is below
// tan_floor, since tan is meaningless there). Returns the margin and the k
// attaining it.
struct ResonanceMargin {
  double margin;
  int offending_k;
};
ResonanceMargin resonance_margin(double h, double eps, int N, double tan_floor = 0.05);

}  // namespace gyro
