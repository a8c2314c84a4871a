#pragma once

#include <optional>

#include "gyro/fields.hpp"
#include "gyro/filters.hpp"
#include "gyro/trajectory.hpp"
#include "gyro/vec3.hpp"

namespace gyro {

// Staggered one-step state: position x at step n, velocity v_half at the
// midpoint n-1/2, and the previous position (x - h*v_half).
struct StaggeredState {
  long long n = 0;
  Vec3 x{};
  Vec3 v_half{};
  Vec3 x_prev{};
};

struct SolverParams {
  double fp_tol = 1e-12;       // relative tolerance on x_next in the fixed point
  int fp_max_iter = 50;
  double resonance_floor = 0.05;  // warn below this margin; hard error below 1e-8
  double blowup_radius = 1e3;
};

struct StepStats {
  int fp_iters = 0;
};

// Large-stepsize starting velocity: parallel part kept, perpendicular part
// replaced by the slow drift eps*(v_par x B1(x0) + E(x0)) x b0.
Vec3 modified_initial_velocity(const FieldModel& model, const Vec3& x0, const Vec3& xdot0);

// Builds the state after the first step (x^1, v^{1/2}) from initial data
// (x0, xdot0) under the given start policy. The Modified policies substitute
// the modified starting velocity; Modified additionally shifts the initial
// position to the guiding centre x0 + eps*xdot0 x b0. The filtered method
// runs its own implicit starting procedure and requires a non-resonant
// (h, eps) pair.
StaggeredState prepare_start(const FieldModel& model, MethodKind method, StartPolicy policy,
                             const Vec3& x0, const Vec3& xdot0, double h,
                             const SolverParams& params = {});

// One step of the Boris kernel: half electric kick, exact implicit midpoint
// rotation, half kick, drift.
StaggeredState step_boris(const FieldModel& model, const StaggeredState& s, double h);

// Boris step plus the transport correction of the nonuniform vector potential
// (A1' at x^n versus the A1 difference across the step); implicit in x^{n+1},
// solved by a fixed point whose linear part is solved exactly each iteration.
StaggeredState step_variational(const FieldModel& model, const StaggeredState& s, double h,
                                const SolverParams& params = {}, StepStats* stats = nullptr);

// Variational step with the psi filter applied to the force, which keeps the
// underresolved gyrorotation from aliasing; exact for constant B and E.
StaggeredState step_filtered(const FieldModel& model, const StaggeredState& s, double h,
                             const FilterPair& filters, const SolverParams& params = {},
                             StepStats* stats = nullptr);

// Velocity at step n from the positions one step either side. The filtered
// method maps the central difference through phi and adds its electric-field
// correction at x_cur.
Vec3 recover_velocity(MethodKind method, const FieldModel& model, const Vec3& x_prev,
                      const Vec3& x_cur, const Vec3& x_next, double h,
                      const FilterPair* filters = nullptr);

// Residual of the symmetric two-step formulation on a position triple; zero
// (up to solver tolerance) on triples generated by the matching one-step map.
Vec3 two_step_residual(MethodKind method, const FieldModel& model, const Vec3& x_m,
                       const Vec3& x_0, const Vec3& x_p, double h,
                       const FilterPair* filters = nullptr);

// Runs n_steps steps from (x0, xdot0), sampling every sample_every steps and
// accumulating energy/moment diagnostics every step (when the model carries a
// potential). Positions beyond |x| = blowup_radius abort the run and return
// the partial trajectory flagged blew_up.
Trajectory integrate(const FieldModel& model, MethodKind method, StartPolicy policy,
                     const Vec3& x0, const Vec3& xdot0, double h, long long n_steps,
                     const SolverParams& params = {}, long long sample_every = 1);

}  // namespace gyro
