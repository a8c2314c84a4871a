#include "gyro/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "gyro/errors.hpp"
#include "gyro/filters.hpp"

namespace gyro {

double energy(const FieldModel& model, const Vec3& x, const Vec3& v) {
  if (!model.has_phi()) throw ConfigError("energy: model carries no potential");
  return 0.5 * norm2(v) + model.phi(x);
}

double magnetic_moment(const FieldModel& model, const Vec3& x, const Vec3& v) {
  const Vec3 B = model.total_B(x);
  const double Bn = norm(B);
  return 0.5 / model.eps_eff * norm2(cross(v, B)) / (Bn * Bn * Bn);
}

namespace {

// 4x4 helpers for the exact affine drift flow (3 coordinates + homogeneous 1).
struct Mat4 {
  std::array<double, 16> a{};
  double& operator()(int i, int j) { return a[4 * i + j]; }
  double operator()(int i, int j) const { return a[4 * i + j]; }
  static Mat4 identity() {
    Mat4 m;
    for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }
};

Mat4 mul(const Mat4& x, const Mat4& y) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  return r;
}

Mat4 expm(Mat4 m) {
  double nrm = 0.0;
  for (double v : m.a) nrm = std::max(nrm, std::abs(v));
  int squarings = 0;
  while (nrm > 0.25) {
    nrm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (double& v : m.a) v *= scale;
  Mat4 sum = Mat4::identity();
  Mat4 term = Mat4::identity();
  for (int k = 1; k <= 24; ++k) {
    term = mul(term, m);
    for (double& v : term.a) v /= k;
    double tn = 0.0;
    for (int i = 0; i < 16; ++i) {
      sum.a[i] += term.a[i];
      tn = std::max(tn, std::abs(term.a[i]));
    }
    if (tn < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = mul(sum, sum);
  return sum;
}

}  // namespace

DriftFlow::DriftFlow(const FieldModel& model, const Vec3& x0) : model_(model) {
  const Mat3 ppar = outer(model.b0, model.b0);
  par_ = ppar * x0;
  y0_ = x0 - par_;
  y_ = y0_;
  affine_ = model.E_affine;
}

Vec3 DriftFlow::rhs(const Vec3& y) const { return model_.eps_eff * cross(model_.E(y + par_), model_.b0); }

void DriftFlow::advance(double dt) {
  if (dt <= 0.0) return;
  if (affine_) {
    // dy/dt = At y + bt with At = -eps hat(b0) E_lin, bt = eps (E0 + E_lin par) x b0
    const Mat3 At = -model_.eps_eff * (hat(model_.b0) * model_.E_lin);
    const Vec3 bt = model_.eps_eff * cross(model_.E0 + model_.E_lin * par_, model_.b0);
    Mat4 g{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) g(i, j) = dt * At(i, j);
      g(i, 3) = dt * bt[i];
    }
    const Mat4 P = expm(g);
    Vec3 yn;
    for (int i = 0; i < 3; ++i)
      yn[i] = P(i, 0) * y_.x + P(i, 1) * y_.y + P(i, 2) * y_.z + P(i, 3);
    y_ = yn;
    t_ += dt;
    return;
  }
  // classical 4th-order steps; step small enough for ~1e-10 local error of the
  // eps-slow flow
  const double max_step = 0.01 / model_.eps_eff;
  const int nsub = std::max(1, static_cast<int>(std::ceil(dt / max_step)));
  const double hs = dt / nsub;
  for (int s = 0; s < nsub; ++s) {
    const Vec3 k1 = rhs(y_);
    const Vec3 k2 = rhs(y_ + (0.5 * hs) * k1);
    const Vec3 k3 = rhs(y_ + (0.5 * hs) * k2);
    const Vec3 k4 = rhs(y_ + hs * k3);
    y_ += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  t_ += dt;
}

Vec3 DriftFlow::at(double t) {
  if (t < t_ - 1e-12 * std::max(1.0, std::abs(t_))) {
    y_ = y0_;
    t_ = 0.0;
  }
  advance(t - t_);
  t_ = t;  // avoid drift of the internal clock
  return y_;
}

Vec3 drift_solution(const FieldModel& model, const Vec3& x0, double t) {
  DriftFlow flow(model, x0);
  return flow.at(t);
}

double drift_deviation(const Trajectory& traj, const FieldModel& model) {
  if (traj.size() == 0) throw ConfigError("drift_deviation: empty trajectory");
  DriftFlow flow(model, traj.xs.front());
  const Mat3 pperp = projections(model.b0).perp;
  double dev = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    dev = std::max(dev, norm(pperp * traj.xs[i] - flow.at(traj.times[i])));
  return dev;
}

SplitSeries split_smooth_oscillatory(const Trajectory& traj) {
  if (traj.sample_every != 1)
    throw ConfigError("split_smooth_oscillatory: needs consecutive samples (sample_every = 1)");
  if (traj.size() < 3)
    throw ConfigError("split_smooth_oscillatory: window shorter than 3 samples");
  SplitSeries s;
  s.times.reserve(traj.size() - 2);
  s.y.reserve(traj.size() - 2);
  s.z.reserve(traj.size() - 2);
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const Vec3 y = 0.25 * (traj.xs[i + 1] + 2.0 * traj.xs[i] + traj.xs[i - 1]);
    const long long n = std::llround(traj.times[i] / traj.h);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    s.times.push_back(traj.times[i]);
    s.y.push_back(y);
    s.z.push_back(sign * (traj.xs[i] - y));
  }
  return s;
}

double ModulationFit::coeff_norm(int k) const {
  const auto& c = coeff(k);
  return std::sqrt(std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]));
}

ModulationFit modulation_fit(const Trajectory& traj, double eps, int K, double t_center,
                             double half_width) {
  using cd = std::complex<double>;
  if (K < 1) throw ConfigError("modulation_fit: K must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (std::abs(traj.times[i] - t_center) <= half_width) idx.push_back(i);
  const int nb = 2 * K + 2;  // 2K+1 oscillatory bins + linear trend column
  if (idx.size() < static_cast<std::size_t>(2 * nb))
    throw ConfigError("modulation_fit: window holds too few samples for the fit");

  // normal equations G c = r for each spatial component
  std::vector<cd> G(nb * nb, cd{});
  std::array<std::vector<cd>, 3> r;
  for (auto& rc : r) rc.assign(nb, cd{});
  std::vector<cd> row(nb);
  for (std::size_t i : idx) {
    const double tt = traj.times[i] - t_center;
    for (int k = -K; k <= K; ++k) row[k + K] = std::polar(1.0, k * tt / eps);
    row[nb - 1] = cd{tt / half_width, 0.0};
    for (int a = 0; a < nb; ++a) {
      const cd ca = std::conj(row[a]);
      for (int b = 0; b < nb; ++b) G[a * nb + b] += ca * row[b];
      for (int c = 0; c < 3; ++c) r[c][a] += ca * traj.xs[i][c];
    }
  }

  // complex Gaussian elimination with partial pivoting, all three right-hand
  // sides at once
  double diag_scale = 0.0;
  for (int a = 0; a < nb; ++a) diag_scale = std::max(diag_scale, std::abs(G[a * nb + a]));
  for (int col = 0; col < nb; ++col) {
    int piv = col;
    for (int i = col + 1; i < nb; ++i)
      if (std::abs(G[i * nb + col]) > std::abs(G[piv * nb + col])) piv = i;
    if (std::abs(G[piv * nb + col]) < 1e-12 * diag_scale)
      throw std::runtime_error("modulation_fit: ill-conditioned design matrix");
    if (piv != col) {
      for (int j = 0; j < nb; ++j) std::swap(G[col * nb + j], G[piv * nb + j]);
      for (int c = 0; c < 3; ++c) std::swap(r[c][col], r[c][piv]);
    }
    for (int i = col + 1; i < nb; ++i) {
      const cd f = G[i * nb + col] / G[col * nb + col];
      for (int j = col; j < nb; ++j) G[i * nb + j] -= f * G[col * nb + j];
      for (int c = 0; c < 3; ++c) r[c][i] -= f * r[c][col];
    }
  }
  std::array<std::vector<cd>, 3> sol;
  for (int c = 0; c < 3; ++c) {
    sol[c].assign(nb, cd{});
    for (int i = nb - 1; i >= 0; --i) {
      cd s = r[c][i];
      for (int j = i + 1; j < nb; ++j) s -= G[i * nb + j] * sol[c][j];
      sol[c][i] = s / G[i * nb + i];
    }
  }

  ModulationFit fit;
  fit.K = K;
  fit.t_center = t_center;
  fit.half_width = half_width;
  fit.z.resize(2 * K + 1);
  for (int k = -K; k <= K; ++k)
    for (int c = 0; c < 3; ++c) fit.z[k + K][c] = sol[c][k + K];

  double ss = 0.0;
  for (std::size_t i : idx) {
    const double tt = traj.times[i] - t_center;
    for (int c = 0; c < 3; ++c) {
      cd f = sol[c][nb - 1] * (tt / half_width);
      for (int k = -K; k <= K; ++k) f += sol[c][k + K] * std::polar(1.0, k * tt / eps);
      ss += std::norm(f - cd{traj.xs[i][c], 0.0});
    }
  }
  fit.residual_rms = std::sqrt(ss / (3.0 * static_cast<double>(idx.size())));
  return fit;
}

}  // namespace gyro
