#include "gyro/reference.hpp"

#include <cmath>
#include <string>

#include "gyro/errors.hpp"
#include "gyro/filters.hpp"
#include "gyro/integrators.hpp"

namespace gyro {

PhaseState exact_constant_solution(const Vec3& b0, double eps, const Vec3& E_const,
                                   const Vec3& x0, const Vec3& v0, double t) {
  if (std::abs(norm(b0) - 1.0) > 1e-12)
    throw ConfigError("exact_constant_solution: b0 must be a unit vector");
  const Vec3 E_par = dot(E_const, b0) * b0;
  const Vec3 v_par0 = dot(v0, b0) * b0;
  const Vec3 v_drift = eps * cross(E_const, b0);
  const Vec3 w0 = (v0 - v_par0) - v_drift;
  const Vec3 wt = rotation_about(b0, -t / eps) * w0;
  PhaseState s;
  s.v = v_par0 + t * E_par + v_drift + wt;
  s.x = x0 + t * (v_par0 + v_drift) + (0.5 * t * t) * E_par + eps * cross(b0, wt - w0);
  return s;
}

Trajectory reference_trajectory(const FieldModel& model, const Vec3& x0, const Vec3& v0,
                                double t_end, double out_dt, double h_ref) {
  if (!(out_dt > 0.0)) throw ConfigError("reference_trajectory: out_dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("reference_trajectory: t_end must be positive");
  const double n_out_f = t_end / out_dt;
  const long long n_out = std::llround(n_out_f);
  if (n_out < 1 || std::abs(n_out_f - static_cast<double>(n_out)) > 1e-9 * std::max(1.0, n_out_f))
    throw ConfigError("reference_trajectory: t_end must be an integer multiple of out_dt");

  long long n_sub;
  if (h_ref == 0.0) {
    n_sub = static_cast<long long>(std::ceil(out_dt / (model.eps_eff / 100.0) - 1e-12));
  } else {
    if (!(h_ref > 0.0)) throw ConfigError("reference_trajectory: h_ref must be positive");
    const double n_sub_f = out_dt / h_ref;
    n_sub = std::llround(n_sub_f);
    if (n_sub < 1 ||
        std::abs(n_sub_f - static_cast<double>(n_sub)) > 1e-9 * std::max(1.0, n_sub_f))
      throw ConfigError("reference_trajectory: h_ref must divide out_dt");
  }
  const long long n_steps = n_out * n_sub;
  if (n_steps > 10'000'000'000LL)
    throw ConfigError("reference_trajectory: refusing " + std::to_string(n_steps) +
                      " steps (cost guard at 1e10)");
  const double h = out_dt / static_cast<double>(n_sub);
  return integrate(model, MethodKind::Boris, StartPolicy::Raw, x0, v0, h, n_steps, {}, n_sub);
}

namespace {

std::size_t locate_sample(const Trajectory& t, double t_eval) {
  if (t.size() < 2) throw ConfigError("global_error: trajectory has too few samples");
  const double dt = t.times[1] - t.times[0];
  const long long i = std::llround((t_eval - t.times.front()) / dt);
  if (i < 0 || static_cast<std::size_t>(i) >= t.size() ||
      std::abs(t.times[static_cast<std::size_t>(i)] - t_eval) > 1e-9 * std::max(1.0, std::abs(t_eval)))
    throw ConfigError("global_error: no sample at requested evaluation time");
  return static_cast<std::size_t>(i);
}

}  // namespace

ErrorReport global_error(const Trajectory& traj, const Trajectory& ref, const Vec3& b0,
                         double t_eval) {
  const std::size_t it = locate_sample(traj, t_eval);
  const std::size_t ir = locate_sample(ref, t_eval);
  const auto proj = projections(b0);
  const Vec3 dx = traj.xs[it] - ref.xs[ir];
  const Vec3 dv = traj.vs[it] - ref.vs[ir];
  ErrorReport e;
  e.err_x = norm(dx) / std::max(1.0, norm(ref.xs[ir]));
  e.err_vpar = norm(proj.par * dv) / std::max(1.0, norm(proj.par * ref.vs[ir]));
  e.err_vperp = norm(proj.perp * dv) / std::max(1.0, norm(proj.perp * ref.vs[ir]));
  return e;
}

}  // namespace gyro
