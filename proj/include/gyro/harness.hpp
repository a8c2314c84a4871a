#pragma once

#include <string>
#include <vector>

#include "gyro/diagnostics.hpp"
#include "gyro/fields.hpp"
#include "gyro/integrators.hpp"
#include "gyro/reference.hpp"
#include "gyro/trajectory.hpp"

namespace gyro {

// Field selection in a config: a catalog name, or an inline description with
// a linear B1 matrix and polynomial E/phi (E defaults to -grad phi).
struct FieldSpec {
  std::string catalog;  // "harmonic" | "quartic" | "uniform"; empty -> inline
  Vec3 b0_raw{0, 0, 1};
  Mat3 B1_matrix{};
  bool has_E = false;
  std::array<Polynomial, 3> E_poly;
  bool has_phi = false;
  Polynomial phi_poly;
};

struct ScenarioConfig {
  FieldSpec field;
  double eps = 0.0;
  double h = 0.0;
  double t_end = 0.0;
  MethodKind method = MethodKind::Boris;
  StartPolicy start_policy = StartPolicy::Raw;
  Vec3 x0{};
  Vec3 v0{};
  long long sample_every = 0;  // 0 -> auto (caps stored samples near 1e6)
  unsigned long long seed = 0;
  std::string output = "out.csv";
};

struct SweepConfig {
  ScenarioConfig base;       // per-cell eps/h/method/policy are overridden
  std::vector<double> eps_list;
  std::vector<double> h_list;
  std::vector<MethodKind> methods;
  std::vector<StartPolicy> policies;
  double t_eval = 0.0;
  double h_ref = 0.0;        // 0 -> auto (eps_eff/100, rounded to divide)
};

ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

FieldModel build_field_model(const FieldSpec& spec, double eps);

// Number of steps a scenario runs: ceil(t_end/h), and the auto sample stride.
long long scenario_steps(const ScenarioConfig& cfg);
long long resolve_sample_every(const ScenarioConfig& cfg);

// Runs one trajectory, writes the trajectory CSV
// (t,x1,x2,x3,v1,v2,v3,H_err,I_err) to cfg.output and a JSON summary next to
// it (<output>.summary.json). CSV bytes depend only on the config.
struct ScenarioResult {
  Trajectory traj;
  double wall_seconds = 0.0;
};
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Error-vs-reference sweep over eps x h x method x policy. Cells run
// independently (OpenMP when jobs != 1); failures are recorded in the status
// column and the sweep continues. Rows are sorted by (method, policy, eps, h)
// and written as method,policy,eps,h,err_x,err_vpar,err_vperp,status.
// t_eval is snapped once to the nearest common grid time of all h.
struct SweepRow {
  MethodKind method = MethodKind::Boris;
  StartPolicy policy = StartPolicy::Raw;
  double eps = 0.0;
  double h = 0.0;
  ErrorReport err;
  std::string status = "ok";
};
struct SweepResult {
  std::vector<SweepRow> rows;
  double t_eval_snapped = 0.0;
  double wall_seconds = 0.0;
};
SweepResult run_convergence_sweep(const SweepConfig& cfg, int jobs = 0);         // parallel driver
SweepResult run_convergence_sweep_serial(const SweepConfig& cfg);                // plain loop

// Coarse trajectory against the slow-drift flow; writes
// t,xp1,xp2,xp3,yp1,yp2,yp3,dev rows plus a summary with the sup deviation.
struct DriftResult {
  Trajectory traj;
  double sup_deviation = 0.0;
  double wall_seconds = 0.0;
};
DriftResult run_drift_experiment(const ScenarioConfig& cfg);

// Long-time energy/moment run with streaming extrema; writes subsampled
// t,H_err,I_err rows plus a summary (max drifts, least-squares energy slope).
// Optional perturbation study reruns with initial data perturbed uniformly in
// [-perturb, perturb]; per-trial outcomes go to the summary only.
struct EnergyOptions {
  bool full = false;  // override t_end with the long horizon 1e7
  double perturb = 0.0;
  int trials = 0;
  bool seed_given = false;
  unsigned long long seed = 0;
  int jobs = 0;
};
struct EnergyTrial {
  double max_H_err = 0.0;
  double max_I_err = 0.0;
  bool blew_up = false;
};
struct EnergyResult {
  Trajectory traj;
  std::vector<EnergyTrial> trials;
  double wall_seconds = 0.0;
};
EnergyResult run_longtime_energy(const ScenarioConfig& cfg, const EnergyOptions& opts = {});

// Resonance margin report for the CLI gate; resonant when margin < floor.
struct ResonanceCheck {
  double margin = 0.0;
  int offending_k = 0;
  bool resonant = false;
};
ResonanceCheck check_resonance_cmd(double h, double eps, int N, double floor = 0.05);

// Deterministic float formatting shared by all CSV writers.
std::string format_double(double v);

}  // namespace gyro
