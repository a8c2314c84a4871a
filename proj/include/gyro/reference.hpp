#pragma once

#include "gyro/fields.hpp"
#include "gyro/trajectory.hpp"
#include "gyro/vec3.hpp"

namespace gyro {

struct PhaseState {
  Vec3 x;
  Vec3 v;
};

// Closed-form solution of x'' = x' cross (b0/eps) + E for constant E and unit
// b0: uniform acceleration along b0, the E x B drift eps*(E x b0), and
// gyration of the remaining perpendicular velocity at frequency 1/eps.
PhaseState exact_constant_solution(const Vec3& b0, double eps, const Vec3& E_const,
                                   const Vec3& x0, const Vec3& v0, double t);

// Fine-step Boris trajectory from raw initial data, used as the trusted
// serial reference. Samples land exactly on multiples of out_dt; h_ref = 0
// picks eps_eff/100 rounded so an integer number of substeps fits in out_dt.
// Refuses runs beyond 1e10 steps.
Trajectory reference_trajectory(const FieldModel& model, const Vec3& x0, const Vec3& v0,
                                double t_end, double out_dt, double h_ref = 0.0);

// Relative errors of a trajectory against a reference at one sample time,
// split along and across b0. Both trajectories must carry a sample at t_eval.
struct ErrorReport {
  double err_x = 0.0;
  double err_vpar = 0.0;
  double err_vperp = 0.0;
};
ErrorReport global_error(const Trajectory& traj, const Trajectory& ref, const Vec3& b0,
                         double t_eval);

}  // namespace gyro
