#include "gyro/fields.hpp"

#include <cmath>

#include "gyro/errors.hpp"

namespace gyro {

FieldModel make_field_model(const Vec3& b0_raw, double eps,
                            std::function<Vec3(const Vec3&)> B1,
                            std::function<Vec3(const Vec3&)> A1,
                            std::function<Mat3(const Vec3&)> A1_jac,
                            std::function<Vec3(const Vec3&)> E,
                            std::function<double(const Vec3&)> phi) {
  if (!(eps > 0.0)) throw ConfigError("field: eps must be positive");
  const double b0n = norm(b0_raw);
  if (!(b0n > 0.0) || !finite(b0_raw)) throw ConfigError("field: b0 must be nonzero and finite");
  if (!B1 || !A1 || !A1_jac || !E) throw ConfigError("field: B1, A1, A1_jac, E are required");
  FieldModel m;
  m.b0_raw = b0_raw;
  m.b0 = b0_raw / b0n;
  m.eps = eps;
  m.eps_eff = eps / b0n;
  m.B1 = std::move(B1);
  m.A1 = std::move(A1);
  m.A1_jac = std::move(A1_jac);
  m.E = std::move(E);
  m.phi = std::move(phi);
  return m;
}

LinearB1Potential potential_for_linear_B1(const Mat3& M) {
  const double tr = M(0, 0) + M(1, 1) + M(2, 2);
  if (std::abs(tr) > 1e-12)
    throw ConfigError("field: B1 matrix must be trace-free for a cross-form potential");
  LinearB1Potential p;
  p.A1 = [M](const Vec3& x) { return (-1.0 / 3.0) * cross(x, M * x); };
  p.A1_jac = [M](const Vec3& x) {
    // column l of the Jacobian: -(1/3)(e_l x (M x) + x x (M e_l))
    const Vec3 Mx = M * x;
    Mat3 j;
    for (int l = 0; l < 3; ++l) {
      Vec3 el{};
      el[l] = 1.0;
      const Vec3 col = (-1.0 / 3.0) * (cross(el, Mx) + cross(x, M * el));
      for (int i = 0; i < 3; ++i) j(i, l) = col[i];
    }
    return j;
  };
  return p;
}

FieldModel make_harmonic_field(double eps) {
  auto B1 = [](const Vec3& x) {
    return Vec3{x.x * (x.z - x.y), x.y * (x.x - x.z), x.z * (x.y - x.x)};
  };
  auto A1 = [](const Vec3& x) {
    const double p = x.x * x.y * x.z;
    return Vec3{p, p, p};
  };
  auto A1_jac = [](const Vec3& x) {
    Mat3 j;
    for (int i = 0; i < 3; ++i) {
      j(i, 0) = x.y * x.z;
      j(i, 1) = x.x * x.z;
      j(i, 2) = x.x * x.y;
    }
    return j;
  };
  auto E = [](const Vec3& x) { return -x; };
  auto phi = [](const Vec3& x) { return 0.5 * norm2(x); };
  FieldModel m = make_field_model({0, 0, 1}, eps, B1, A1, A1_jac, E, phi);
  m.E_affine = true;
  m.E0 = Vec3{};
  m.E_lin = -1.0 * Mat3::identity();
  return m;
}

FieldModel make_quartic_field(double eps) {
  Mat3 M;
  M(0, 1) = 1.0;  M(0, 2) = -1.0;
  M(1, 0) = 1.0;  M(1, 2) = 1.0;
  M(2, 0) = -1.0; M(2, 1) = 1.0;
  auto pot = potential_for_linear_B1(M);
  auto B1 = [M](const Vec3& x) { return M * x; };
  auto phi = [](const Vec3& x) {
    const double x1 = x.x, x2 = x.y, x3 = x.z;
    return x1 * x1 * x1 - x2 * x2 * x2 + 0.2 * x1 * x1 * x1 * x1 + x2 * x2 * x2 * x2 +
           x3 * x3 * x3 * x3;
  };
  auto E = [](const Vec3& x) {
    const double x1 = x.x, x2 = x.y, x3 = x.z;
    return Vec3{-(3.0 * x1 * x1 + 0.8 * x1 * x1 * x1), -(-3.0 * x2 * x2 + 4.0 * x2 * x2 * x2),
                -(4.0 * x3 * x3 * x3)};
  };
  return make_field_model({1, 0, 0.5}, eps, B1, pot.A1, pot.A1_jac, E, phi);
}

FieldModel make_uniform_field(double eps, const Vec3& b0_raw, const Vec3& E_const) {
  auto B1 = [](const Vec3&) { return Vec3{}; };
  auto A1 = [](const Vec3&) { return Vec3{}; };
  auto A1_jac = [](const Vec3&) { return Mat3::zero(); };
  auto E = [E_const](const Vec3&) { return E_const; };
  auto phi = [E_const](const Vec3& x) { return -dot(E_const, x); };
  FieldModel m = make_field_model(b0_raw, eps, B1, A1, A1_jac, E, phi);
  m.E_affine = true;
  m.E0 = E_const;
  m.E_lin = Mat3::zero();
  return m;
}

double Polynomial::eval(const Vec3& x) const {
  double s = 0.0;
  for (const Monomial& t : terms)
    s += t.coef * std::pow(x.x, t.px) * std::pow(x.y, t.py) * std::pow(x.z, t.pz);
  return s;
}

Vec3 Polynomial::grad(const Vec3& x) const {
  Vec3 g{};
  for (const Monomial& t : terms) {
    if (t.px > 0)
      g.x += t.coef * t.px * std::pow(x.x, t.px - 1) * std::pow(x.y, t.py) * std::pow(x.z, t.pz);
    if (t.py > 0)
      g.y += t.coef * t.py * std::pow(x.x, t.px) * std::pow(x.y, t.py - 1) * std::pow(x.z, t.pz);
    if (t.pz > 0)
      g.z += t.coef * t.pz * std::pow(x.x, t.px) * std::pow(x.y, t.py) * std::pow(x.z, t.pz - 1);
  }
  return g;
}

ConsistencyReport check_consistency(const FieldModel& model, const std::vector<Vec3>& points,
                                    double fd_step) {
  ConsistencyReport r;
  const double d = fd_step;
  for (const Vec3& x : points) {
    // central differences of A1 along each coordinate
    Mat3 jac_fd;  // jac_fd(i,j) = d A1_i / d x_j
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x;
      xp[j] += d;
      xm[j] -= d;
      const Vec3 df = (model.A1(xp) - model.A1(xm)) / (2.0 * d);
      for (int i = 0; i < 3; ++i) jac_fd(i, j) = df[i];
    }
    const Vec3 curl_fd{jac_fd(2, 1) - jac_fd(1, 2), jac_fd(0, 2) - jac_fd(2, 0),
                       jac_fd(1, 0) - jac_fd(0, 1)};
    r.max_curl_residual = std::max(r.max_curl_residual, norm(curl_fd - model.B1(x)));
    r.max_jac_residual = std::max(r.max_jac_residual, max_abs(jac_fd - model.A1_jac(x)));
    if (model.has_phi()) {
      Vec3 grad_fd;
      for (int j = 0; j < 3; ++j) {
        Vec3 xp = x, xm = x;
        xp[j] += d;
        xm[j] -= d;
        grad_fd[j] = (model.phi(xp) - model.phi(xm)) / (2.0 * d);
      }
      r.max_grad_residual = std::max(r.max_grad_residual, norm(grad_fd + model.E(x)));
    }
  }
  if (!model.has_phi()) r.max_grad_residual = std::nan("");
  return r;
}

}  // namespace gyro
