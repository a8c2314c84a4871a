#include "gyro/integrators.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "gyro/diagnostics.hpp"
#include "gyro/errors.hpp"

namespace gyro {

namespace {

// Resolve the start policy into the initial data the method actually uses.
std::pair<Vec3, Vec3> apply_start_policy(const FieldModel& model, StartPolicy policy,
                                         const Vec3& x0, const Vec3& xdot0) {
  if (policy == StartPolicy::Raw) return {x0, xdot0};
  Vec3 xs = x0;
  if (policy == StartPolicy::Modified)
    xs = x0 + model.eps_eff * cross(xdot0, model.b0);  // guiding-centre position
  return {xs, modified_initial_velocity(model, xs, xdot0)};
}

// Closed-form solve of v2 - v1 = (h/2) (v2 + v1) x B via the usual t/s vectors.
Vec3 boris_rotate(const Vec3& v1, const Vec3& B, double h) {
  const Vec3 t = (0.5 * h) * B;
  const Vec3 vp = v1 + cross(v1, t);
  const Vec3 s = (2.0 / (1.0 + norm2(t))) * t;
  return v1 + cross(vp, s);
}

StaggeredState start_leapfrog(const FieldModel& model, const Vec3& x0, const Vec3& v0, double h) {
  const Vec3 v_half = v0 + (0.5 * h) * cross(v0, model.total_B(x0)) + (0.5 * h) * model.E(x0);
  return {1, x0 + h * v_half, v_half, x0};
}

StaggeredState start_filtered(const FieldModel& model, const Vec3& x0, const Vec3& v0, double h,
                              const SolverParams& params) {
  const auto res = resonance_margin(h, model.eps_eff, 2, params.resonance_floor);
  if (res.margin < 1e-8)
    throw ResonanceError("filtered start: (h, eps) resonant", res.margin, res.offending_k);
  if (res.margin < params.resonance_floor)
    std::fprintf(stderr, "warning: filtered method near resonance, margin %.3e at k=%d\n",
                 res.margin, res.offending_k);
  const FilterPair F = filter_pair(h, model.eps_eff, model.b0);

  const Vec3 E0 = model.E(x0);
  const Vec3 B0 = model.total_B(x0);
  const Mat3 A1p0 = model.A1_jac(x0);
  const double s = 1.0 - 1.0 / sinc(h / model.eps_eff);
  const Vec3 vbar = F.phi_inv * (v0 - model.eps_eff * s * cross(E0, model.b0));
  const Vec3 base = cross(vbar, B0) + A1p0 * vbar + E0;

  // dv enters its own defining equation only through the A1 difference at
  // x0 +- h vbar + h dv/2; iterate from dv = 0.
  Vec3 dv{};
  bool converged = false;
  for (int it = 1; it <= params.fp_max_iter; ++it) {
    const Vec3 shift = h * vbar + (0.5 * h) * dv;
    const Vec3 xp = x0 + shift;
    const Vec3 xm = x0 - (h * vbar) + (0.5 * h) * dv;
    const Vec3 dA = (model.A1(xp) - model.A1(xm)) / (2.0 * h);
    const Vec3 dv_new = h * (F.psi * (base - dA));
    const double delta = norm(dv_new - dv);
    dv = dv_new;
    if (delta <= params.fp_tol * std::max(1.0, norm(vbar))) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("filtered start: fixed point did not converge", 0, norm(dv));
  const Vec3 v_half = vbar + 0.5 * dv;
  return {1, x0 + h * v_half, v_half, x0};
}

// Shared implicit step of the variational (psi = nullptr) and filtered
// (psi = &filters.psi) methods. The rotation + transport part is linear in the
// unknown mid-velocity and solved exactly; only the A1 difference at the trial
// x^{n+1} is lagged.
StaggeredState step_implicit(const FieldModel& model, const StaggeredState& st, double h,
                             const Mat3* psi, const SolverParams& params, StepStats* stats) {
  const Vec3 Bn = model.total_B(st.x);
  const Vec3 En = model.E(st.x);
  const Mat3 A1pn = model.A1_jac(st.x);
  const Vec3 A1m = model.A1(st.x_prev);

  const Vec3 kick = psi ? (0.5 * h) * (*psi * En) : (0.5 * h) * En;
  const Vec3 vplus = st.v_half + kick;

  const Mat3 G = A1pn - hat(Bn);  // G v = v x B + A1' v
  const Mat3 PsiG = psi ? *psi * G : G;
  const Lu3 lhs(Mat3::identity() - (0.5 * h) * PsiG);
  const Vec3 rhs0 = (Mat3::identity() + (0.5 * h) * PsiG) * vplus;

  // Boris step as predictor for x^{n+1}
  Vec3 x_next = st.x + h * (boris_rotate(vplus, Bn, h) + kick);

  Vec3 v_new{};
  bool converged = false;
  int iters = 0;
  double delta = 0.0;
  for (int it = 1; it <= params.fp_max_iter; ++it) {
    iters = it;
    const Vec3 dA = (model.A1(x_next) - A1m) / (2.0 * h);
    const Vec3 v2 = lhs.solve(rhs0 - h * (psi ? *psi * dA : dA));
    v_new = v2 + kick;
    const Vec3 x_cand = st.x + h * v_new;
    delta = norm(x_cand - x_next);
    x_next = x_cand;
    if (delta <= params.fp_tol * std::max(1.0, norm(x_cand))) {
      converged = true;
      break;
    }
  }
  if (stats) stats->fp_iters = iters;
  if (!converged)
    throw ConvergenceError("implicit step: fixed point did not converge", st.n, delta);
  return {st.n + 1, x_next, v_new, st.x};
}

}  // namespace

Vec3 modified_initial_velocity(const FieldModel& model, const Vec3& x0, const Vec3& xdot0) {
  const Vec3 v_par = dot(xdot0, model.b0) * model.b0;
  const Vec3 v_perp =
      model.eps_eff * cross(cross(v_par, model.B1(x0)) + model.E(x0), model.b0);
  return v_par + v_perp;
}

StaggeredState prepare_start(const FieldModel& model, MethodKind method, StartPolicy policy,
                             const Vec3& x0, const Vec3& xdot0, double h,
                             const SolverParams& params) {
  if (!(h > 0.0)) throw ConfigError("prepare_start: h must be positive");
  const auto [xs, vs] = apply_start_policy(model, policy, x0, xdot0);
  if (method == MethodKind::FilteredVariational) return start_filtered(model, xs, vs, h, params);
  return start_leapfrog(model, xs, vs, h);
}

StaggeredState step_boris(const FieldModel& model, const StaggeredState& s, double h) {
  const Vec3 En = model.E(s.x);
  const Vec3 kick = (0.5 * h) * En;
  const Vec3 v2 = boris_rotate(s.v_half + kick, model.total_B(s.x), h);
  const Vec3 v_new = v2 + kick;
  return {s.n + 1, s.x + h * v_new, v_new, s.x};
}

StaggeredState step_variational(const FieldModel& model, const StaggeredState& s, double h,
                                const SolverParams& params, StepStats* stats) {
  return step_implicit(model, s, h, nullptr, params, stats);
}

StaggeredState step_filtered(const FieldModel& model, const StaggeredState& s, double h,
                             const FilterPair& filters, const SolverParams& params,
                             StepStats* stats) {
  return step_implicit(model, s, h, &filters.psi, params, stats);
}

Vec3 recover_velocity(MethodKind method, const FieldModel& model, const Vec3& x_prev,
                      const Vec3& x_cur, const Vec3& x_next, double h,
                      const FilterPair* filters) {
  const Vec3 central = (x_next - x_prev) / (2.0 * h);
  if (method != MethodKind::FilteredVariational) return central;
  const double s = 1.0 - 1.0 / sinc(h / model.eps_eff);
  return filters->phi * central + model.eps_eff * s * cross(model.E(x_cur), model.b0);
}

Vec3 two_step_residual(MethodKind method, const FieldModel& model, const Vec3& x_m,
                       const Vec3& x_0, const Vec3& x_p, double h, const FilterPair* filters) {
  const Vec3 d2 = (x_p - 2.0 * x_0 + x_m) / (h * h);
  const Vec3 dc = (x_p - x_m) / (2.0 * h);
  Vec3 force = cross(dc, model.total_B(x_0)) + model.E(x_0);
  if (method != MethodKind::Boris)
    force += model.A1_jac(x_0) * dc - (model.A1(x_p) - model.A1(x_m)) / (2.0 * h);
  if (method == MethodKind::FilteredVariational) force = filters->psi * force;
  return d2 - force;
}

Trajectory integrate(const FieldModel& model, MethodKind method, StartPolicy policy,
                     const Vec3& x0, const Vec3& xdot0, double h, long long n_steps,
                     const SolverParams& params, long long sample_every) {
  if (!(h > 0.0)) throw ConfigError("integrate: h must be positive");
  if (n_steps < 1) throw ConfigError("integrate: n_steps must be >= 1");
  if (sample_every < 1) throw ConfigError("integrate: sample_every must be >= 1");

  Trajectory traj;
  traj.h = h;
  traj.sample_every = sample_every;
  traj.method = method;
  traj.has_energy = model.has_phi();

  const bool filtered = method == MethodKind::FilteredVariational;
  FilterPair F{};
  StaggeredState state = prepare_start(model, method, policy, x0, xdot0, h, params);
  if (filtered) F = filter_pair(h, model.eps_eff, model.b0);

  const auto [xi, vi] = apply_start_policy(model, policy, x0, xdot0);
  const std::size_t want = static_cast<std::size_t>(n_steps / sample_every) + 1;
  traj.times.reserve(want);
  traj.xs.reserve(want);
  traj.vs.reserve(want);
  if (traj.has_energy) {
    traj.h_errs.reserve(want);
    traj.i_errs.reserve(want);
    traj.H0 = energy(model, xi, vi);
    traj.I0 = magnetic_moment(model, xi, vi);
    traj.I_min = traj.I_max = traj.I0;
  }
  traj.times.push_back(0.0);
  traj.xs.push_back(xi);
  traj.vs.push_back(vi);
  if (traj.has_energy) {
    traj.h_errs.push_back(0.0);
    traj.i_errs.push_back(0.0);
  }

  // slope of H - H0 via least squares with times centered at t_end/2
  const double t_mid = 0.5 * static_cast<double>(n_steps) * h;
  double sum_tt = 0.0, sum_te = 0.0;

  StepStats stats;
  for (long long n = 1; n <= n_steps; ++n) {
    StaggeredState next;
    switch (method) {
      case MethodKind::Boris:
        next = step_boris(model, state, h);
        break;
      case MethodKind::Variational:
        next = step_variational(model, state, h, params, &stats);
        break;
      case MethodKind::FilteredVariational:
        next = step_filtered(model, state, h, F, params, &stats);
        break;
    }
    if (method != MethodKind::Boris) {
      traj.fp_iter_total += stats.fp_iters;
      traj.fp_iter_max = std::max(traj.fp_iter_max, stats.fp_iters);
    }

    const double t = static_cast<double>(n) * h;
    const Vec3 vn =
        recover_velocity(method, model, state.x_prev, state.x, next.x, h, filtered ? &F : nullptr);
    if (traj.has_energy) {
      const double Herr = energy(model, state.x, vn) - traj.H0;
      const double In = magnetic_moment(model, state.x, vn);
      traj.max_H_err = std::max(traj.max_H_err, std::abs(Herr));
      traj.max_I_err = std::max(traj.max_I_err, std::abs(In - traj.I0));
      traj.I_min = std::min(traj.I_min, In);
      traj.I_max = std::max(traj.I_max, In);
      const double tc = t - t_mid;
      sum_tt += tc * tc;
      sum_te += tc * Herr;
      if (n % sample_every == 0) {
        traj.h_errs.push_back(Herr);
        traj.i_errs.push_back(In - traj.I0);
      }
    }
    if (n % sample_every == 0) {
      traj.times.push_back(t);
      traj.xs.push_back(state.x);
      traj.vs.push_back(vn);
    }
    if (!finite(next.x) || norm(next.x) > params.blowup_radius) {
      traj.blew_up = true;
      traj.blowup_step = next.n;
      break;
    }
    state = next;
  }
  if (sum_tt > 0.0) traj.energy_slope = sum_te / sum_tt;
  return traj;
}

}  // namespace gyro
