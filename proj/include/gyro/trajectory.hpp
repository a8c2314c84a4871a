#pragma once

#include <limits>
#include <vector>

#include "gyro/vec3.hpp"

namespace gyro {

enum class MethodKind { Boris, Variational, FilteredVariational };
enum class StartPolicy { Raw, Modified, ModifiedVelocityOnly };

const char* to_string(MethodKind m);
const char* to_string(StartPolicy p);

// Sampled trajectory plus streaming diagnostics. Samples are kept every
// sample_every steps; the energy/moment accumulators are updated every step so
// long runs can keep sample storage small without losing the extrema.
struct Trajectory {
  double h = 0.0;
  long long sample_every = 1;
  MethodKind method = MethodKind::Boris;
  bool has_energy = false;

  std::vector<double> times;
  std::vector<Vec3> xs;
  std::vector<Vec3> vs;
  std::vector<double> h_errs;  // H - H0 per sample (empty when !has_energy)
  std::vector<double> i_errs;  // I - I0 per sample (empty when !has_energy)

  double H0 = 0.0, I0 = 0.0;
  double max_H_err = 0.0;
  double max_I_err = 0.0;
  double I_min = std::numeric_limits<double>::infinity();
  double I_max = -std::numeric_limits<double>::infinity();

  // least-squares slope of H - H0 over all steps (times centered at t_end/2)
  double energy_slope = 0.0;

  bool blew_up = false;
  long long blowup_step = -1;

  long long fp_iter_total = 0;
  int fp_iter_max = 0;

  std::size_t size() const { return times.size(); }
};

}  // namespace gyro
