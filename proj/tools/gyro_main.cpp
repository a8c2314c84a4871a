#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "gyro/errors.hpp"
#include "gyro/harness.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitResonance = 2;
constexpr int kExitNonconvergence = 3;
constexpr int kExitBlowup = 4;

void print_run_summary(const char* what, const gyro::Trajectory& t, const std::string& output) {
  std::printf("%s: %zu samples -> %s\n", what, t.size(), output.c_str());
  if (t.size() > 0)
    std::printf("final t=%s x=(%s, %s, %s)\n", gyro::format_double(t.times.back()).c_str(),
                gyro::format_double(t.xs.back().x).c_str(),
                gyro::format_double(t.xs.back().y).c_str(),
                gyro::format_double(t.xs.back().z).c_str());
  if (t.has_energy)
    std::printf("max|H-H0|=%s max|I-I0|=%s\n", gyro::format_double(t.max_H_err).c_str(),
                gyro::format_double(t.max_I_err).c_str());
  if (t.blew_up)
    std::printf("blow-up at step %lld (|x| left the trust region)\n",
                static_cast<long long>(t.blowup_step));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"large-stepsize integrators for strongly magnetized particle motion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  int jobs = 0;

  auto* sim = app.add_subcommand("simulate", "run one trajectory and write it as CSV");
  sim->add_option("config", config_path, "JSON scenario config")->required();
  sim->add_option("--output", output_override, "override the output path from the config");

  auto* sweep = app.add_subcommand("sweep", "error-vs-reference sweep over eps, h, method, policy");
  sweep->add_option("config", config_path, "JSON sweep config")->required();
  sweep->add_option("--output", output_override, "override the output path from the config");
  sweep->add_option("--jobs", jobs, "worker threads (0 = all cores, 1 = serial)");

  auto* drift = app.add_subcommand("drift", "compare a coarse run against the slow-drift flow");
  drift->add_option("config", config_path, "JSON scenario config")->required();
  drift->add_option("--output", output_override, "override the output path from the config");

  bool full = false;
  double perturb = 0.0;
  int trials = 0;
  unsigned long long seed = 0;
  auto* energy = app.add_subcommand("energy", "long-time energy and magnetic-moment drift");
  energy->add_option("config", config_path, "JSON scenario config")->required();
  energy->add_option("--output", output_override, "override the output path from the config");
  energy->add_flag("--full", full, "run the long horizon t_end = 1e7");
  energy->add_option("--perturb", perturb, "half-width of the uniform initial-data perturbation");
  energy->add_option("--trials", trials, "number of perturbed reruns");
  auto* seed_opt = energy->add_option("--seed", seed, "seed for the perturbation draws");
  energy->add_option("--jobs", jobs, "worker threads for the perturbed reruns");

  double res_h = 0.0, res_eps = 0.0;
  int res_n = 2;
  auto* reso = app.add_subcommand("check-resonance",
                                  "report the stepsize resonance margin for (h, eps)");
  reso->set_help_flag("--help", "print help");  // frees -h for the step size
  reso->add_option("--h", res_h, "step size")->required();
  reso->add_option("--eps", res_eps, "field strength parameter")->required();
  reso->add_option("--N", res_n, "number of harmonics to screen")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      gyro::ScenarioConfig cfg = gyro::load_scenario_config(config_path);
      if (!output_override.empty()) cfg.output = output_override;
      const gyro::ScenarioResult r = gyro::run_scenario(cfg);
      print_run_summary("simulate", r.traj, cfg.output);
      return r.traj.blew_up ? kExitBlowup : kExitOk;
    }
    if (sweep->parsed()) {
      gyro::SweepConfig cfg = gyro::load_sweep_config(config_path);
      if (!output_override.empty()) cfg.base.output = output_override;
      const gyro::SweepResult r = gyro::run_convergence_sweep(cfg, jobs);
      std::printf("sweep: %zu cells at t=%s -> %s\n", r.rows.size(),
                  gyro::format_double(r.t_eval_snapped).c_str(), cfg.base.output.c_str());
      return kExitOk;
    }
    if (drift->parsed()) {
      gyro::ScenarioConfig cfg = gyro::load_scenario_config(config_path);
      if (!output_override.empty()) cfg.output = output_override;
      const gyro::DriftResult r = gyro::run_drift_experiment(cfg);
      print_run_summary("drift", r.traj, cfg.output);
      std::printf("sup deviation from drift flow: %s\n",
                  gyro::format_double(r.sup_deviation).c_str());
      return r.traj.blew_up ? kExitBlowup : kExitOk;
    }
    if (energy->parsed()) {
      gyro::ScenarioConfig cfg = gyro::load_scenario_config(config_path);
      if (!output_override.empty()) cfg.output = output_override;
      gyro::EnergyOptions opts;
      opts.full = full;
      opts.perturb = perturb;
      opts.trials = trials;
      opts.seed_given = seed_opt->count() > 0;
      opts.seed = seed;
      opts.jobs = jobs;
      if (opts.trials > 0 && !(opts.perturb > 0.0))
        throw gyro::ConfigError("energy: --trials needs a positive --perturb");
      const gyro::EnergyResult r = gyro::run_longtime_energy(cfg, opts);
      print_run_summary("energy", r.traj, cfg.output);
      return r.traj.blew_up ? kExitBlowup : kExitOk;
    }
    // check-resonance
    const gyro::ResonanceCheck r = gyro::check_resonance_cmd(res_h, res_eps, res_n);
    std::printf("margin=%s offending_k=%d resonant=%s\n", gyro::format_double(r.margin).c_str(),
                r.offending_k, r.resonant ? "yes" : "no");
    return r.resonant ? kExitResonance : kExitOk;
  } catch (const gyro::ResonanceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitResonance;
  } catch (const gyro::ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonconvergence;
  } catch (const gyro::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
