#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gyro/vec3.hpp"

namespace gyro {

// Electromagnetic field in the strong-field splitting
//   B(x) = b0_raw/eps + B1(x),  A(x) = -(1/2) x cross b0_raw/eps + A1(x),
// normalized internally to a unit direction b0 and effective strength
// 1/eps_eff with eps_eff = eps/|b0_raw|. E is the electric field; phi, when
// present, is its scalar potential (E = -grad phi) and enables energy
// diagnostics.
struct FieldModel {
  Vec3 b0_raw{0, 0, 1};
  Vec3 b0{0, 0, 1};  // unit direction
  double eps = 1.0;
  double eps_eff = 1.0;

  std::function<Vec3(const Vec3&)> B1;
  std::function<Vec3(const Vec3&)> A1;
  std::function<Mat3(const Vec3&)> A1_jac;
  std::function<Vec3(const Vec3&)> E;
  std::function<double(const Vec3&)> phi;  // may be empty

  // Set when E is affine (E(x) = E0 + E_lin x); lets the slow-drift flow be
  // solved in closed form instead of numerically.
  bool E_affine = false;
  Vec3 E0{};
  Mat3 E_lin{};

  bool has_phi() const { return static_cast<bool>(phi); }

  Vec3 total_B(const Vec3& x) const { return (1.0 / eps_eff) * b0 + B1(x); }
  Vec3 total_A(const Vec3& x) const { return (-0.5 / eps_eff) * cross(x, b0) + A1(x); }
};

// Validates b0_raw and eps and fills the normalized members. Any of phi may be
// empty; B1/A1/A1_jac/E must be callable.
FieldModel make_field_model(const Vec3& b0_raw, double eps,
                            std::function<Vec3(const Vec3&)> B1,
                            std::function<Vec3(const Vec3&)> A1,
                            std::function<Mat3(const Vec3&)> A1_jac,
                            std::function<Vec3(const Vec3&)> E,
                            std::function<double(const Vec3&)> phi = {});

// Vector potential of a linear divergence-free field B1(x) = M x, via
// A1(x) = -(1/3) x cross (M x), with its exact Jacobian. Requires M
// trace-free (|tr M| <= 1e-12), otherwise no potential of this form exists.
struct LinearB1Potential {
  std::function<Vec3(const Vec3&)> A1;
  std::function<Mat3(const Vec3&)> A1_jac;
};
LinearB1Potential potential_for_linear_B1(const Mat3& M);

// Built-in field catalog.
// harmonic: b0 = e3, quadratic swirl B1 = (x1(x3-x2), x2(x1-x3), x3(x2-x1))
//           with A1 = x1 x2 x3 (1,1,1), harmonic potential phi = |x|^2/2.
// quartic:  b0_raw = (1,0,0.5), linear B1 = (x2-x3, x1+x3, x2-x1),
//           phi = x1^3 - x2^3 + x1^4/5 + x2^4 + x3^4.
// uniform:  B1 = 0 with a constant E (phi = -E.x).
FieldModel make_harmonic_field(double eps);
FieldModel make_quartic_field(double eps);
FieldModel make_uniform_field(double eps, const Vec3& b0_raw = {0, 0, 1},
                              const Vec3& E_const = {0, 0, 0});

// Sparse polynomial in (x1, x2, x3), used for config-supplied fields.
struct Monomial {
  double coef = 0.0;
  int px = 0, py = 0, pz = 0;
};
struct Polynomial {
  std::vector<Monomial> terms;
  double eval(const Vec3& x) const;
  Vec3 grad(const Vec3& x) const;
};

// Finite-difference consistency of the analytic pieces: curl A1 vs B1, the
// A1 Jacobian vs differenced A1, and -grad phi vs E (NaN when phi absent).
struct ConsistencyReport {
  double max_curl_residual = 0.0;
  double max_jac_residual = 0.0;
  double max_grad_residual = 0.0;
};
ConsistencyReport check_consistency(const FieldModel& model, const std::vector<Vec3>& points,
                                    double fd_step = 1e-5);

}  // namespace gyro
