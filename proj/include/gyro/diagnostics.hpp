#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "gyro/fields.hpp"
#include "gyro/trajectory.hpp"
#include "gyro/vec3.hpp"

namespace gyro {

// Total energy H = |v|^2/2 + phi(x). Requires the model to carry a potential.
double energy(const FieldModel& model, const Vec3& x, const Vec3& v);

// Adiabatic invariant (magnetic moment)
//   I = (1/(2 eps_eff)) |v x B(x)|^2 / |B(x)|^3.
double magnetic_moment(const FieldModel& model, const Vec3& x, const Vec3& v);

// Slow drift of the perpendicular position,
//   dy/dt = eps_eff * E(y) x b0,  y(0) = Pperp x0,
// with the parallel coordinate of the E argument frozen at its initial value.
// Affine E uses the exact flow; otherwise a classical 4th-order step with
// per-step local error <= 1e-10. DriftFlow advances incrementally.
class DriftFlow {
 public:
  DriftFlow(const FieldModel& model, const Vec3& x0);
  Vec3 at(double t);  // monotone t only; restarts internally if t decreases

 private:
  const FieldModel& model_;
  Vec3 y0_;
  Vec3 par_;   // frozen parallel component of the E argument
  Vec3 y_;
  double t_ = 0.0;
  bool affine_;
  Vec3 rhs(const Vec3& y) const;
  void advance(double dt);
};

Vec3 drift_solution(const FieldModel& model, const Vec3& x0, double t);

// sup over samples of |Pperp x_n - y_perp(t_n)|.
double drift_deviation(const Trajectory& traj, const FieldModel& model);

// Splits consecutive samples (sample_every must be 1) into the smooth average
// y_n = (x^{n+1} + 2 x^n + x^{n-1})/4 and the alternating remainder
// z_n = (-1)^n (x^n - y_n); the end points are dropped.
struct SplitSeries {
  std::vector<double> times;
  std::vector<Vec3> y;
  std::vector<Vec3> z;
};
SplitSeries split_smooth_oscillatory(const Trajectory& traj);

// Least-squares fit of trajectory positions in a time window against
// modulated oscillations sum_k z^k e^{i k (t - t_center)/eps}, k = -K..K,
// with an extra linear-in-t column carried by the k = 0 (smooth) bin so the
// slow drift does not leak into the oscillatory coefficients.
struct ModulationFit {
  int K = 0;
  double t_center = 0.0;
  double half_width = 0.0;
  // coefficients indexed k = -K..K at [k + K], one complex 3-vector each
  std::vector<std::array<std::complex<double>, 3>> z;
  double residual_rms = 0.0;

  const std::array<std::complex<double>, 3>& coeff(int k) const { return z[k + K]; }
  double coeff_norm(int k) const;
};
ModulationFit modulation_fit(const Trajectory& traj, double eps, int K, double t_center,
                             double half_width);

}  // namespace gyro
