#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "gyro/errors.hpp"
#include "gyro/harness.hpp"
#include "gyro/integrators.hpp"

using namespace gyro;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

const char* kScenario = R"({
  "field": "harmonic", "eps": 0.01, "h": 0.05, "t_end": 2.0,
  "method": "variational", "start_policy": "modified",
  "x0": [0.3, 0.2, -1.4], "v0": [-0.7, 0.08, 0.2],
  "sample_every": 4, "seed": 7, "output": "harness_scenario.csv"
})";

}  // namespace

TEST_CASE("scenario configs parse with defaults and strict key checking") {
  ScenarioConfig c = parse_scenario_config(kScenario);
  CHECK(c.field.catalog == "harmonic");
  CHECK(c.eps == 0.01);
  CHECK(c.h == 0.05);
  CHECK(c.t_end == 2.0);
  CHECK(c.method == MethodKind::Variational);
  CHECK(c.start_policy == StartPolicy::Modified);
  CHECK(c.x0.x == 0.3);
  CHECK(c.v0.z == 0.2);
  CHECK(c.sample_every == 4);
  CHECK(c.seed == 7);
  CHECK(c.output == "harness_scenario.csv");

  ScenarioConfig d = parse_scenario_config(R"({
    "field": "uniform", "eps": 0.1, "h": 0.1, "t_end": 1.0,
    "method": "boris", "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0]})");
  CHECK(d.sample_every == 0);
  CHECK(d.seed == 0);
  CHECK(d.output == "out.csv");

  auto bad = [](const char* text) {
    CHECK_THROWS_AS((void)parse_scenario_config(text), ConfigError);
  };
  bad(R"({"field": "uniform", "eps": 0.1, "h": 0.1, "t_end": 1.0, "method": "boris",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0], "stepsize": 0.1})");  // unknown key
  bad(R"({"field": "uniform", "eps": -0.1, "h": 0.1, "t_end": 1.0, "method": "boris",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0]})");  // eps <= 0
  bad(R"({"field": "uniform", "eps": 0.1, "h": 0.1, "t_end": 1.0, "method": "rk4",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0]})");  // unknown method
  bad(R"({"field": "uniform", "eps": 0.1, "h": 1e-4, "t_end": 1e8, "method": "boris",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0]})");  // 1e12 steps
  bad(R"({"field": "uniform", "eps": 0.1, "h": 0.1, "t_end": 1.0, "method": "boris",
          "start_policy": "raw", "x0": [0,0], "v0": [1,0,0]})");  // bad arity
  bad(R"({"field": "uniform", "eps": 0.1, "h": 0.1, "t_end": 1.0, "method": "boris",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0], "sample_every": 0})");
  bad(R"({"field": "gaussian", "eps": 0.1, "h": 0.1, "t_end": 1.0, "method": "boris",
          "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0]})");  // unknown catalog
  bad("not json at all");
}

TEST_CASE("inline field specs build with derived electric field and affine detection") {
  ScenarioConfig c = parse_scenario_config(R"({
    "field": {
      "b0": [0, 0, 2],
      "B1_matrix": [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
      "phi": [{"coef": 0.5, "powers": [2, 0, 0]}, {"coef": -1.0, "powers": [0, 1, 0]}]
    },
    "eps": 0.01, "h": 0.05, "t_end": 1.0, "method": "boris", "start_policy": "raw",
    "x0": [0.2, 0.1, 0], "v0": [0, 0, 1]})");
  FieldModel m = build_field_model(c.field, c.eps);
  CHECK(m.eps_eff == doctest::Approx(0.005).epsilon(1e-15));
  // E = -grad phi = (-x, 1, 0)
  CHECK(norm(m.E({0.3, -0.2, 0.7}) - Vec3{-0.3, 1.0, 0.0}) <= 1e-15);
  CHECK(norm(m.B1({0.3, -0.2, 0.7}) - Vec3{-0.2, 0.3, 0.0}) <= 1e-15);
  ConsistencyReport rep = check_consistency(m, {{0.3, -0.2, 0.7}, {0.1, 0.4, -0.5}});
  CHECK(rep.max_curl_residual <= 1e-6);
  CHECK(rep.max_grad_residual <= 1e-6);

  // explicit affine E feeds the closed-form drift path
  ScenarioConfig ca = parse_scenario_config(R"({
    "field": {
      "B1_matrix": [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
      "E": [[{"coef": 0.5}], [{"coef": -2.0, "powers": [1, 0, 0]}], []]
    },
    "eps": 0.01, "h": 0.05, "t_end": 1.0, "method": "boris", "start_policy": "raw",
    "x0": [0, 0, 0], "v0": [0, 0, 1]})");
  FieldModel ma = build_field_model(ca.field, ca.eps);
  CHECK(ma.E_affine);
  CHECK(ma.E0.x == 0.5);
  CHECK(ma.E_lin(1, 0) == -2.0);

  // a quadratic term must disable the affine path
  ScenarioConfig cq = parse_scenario_config(R"({
    "field": {
      "B1_matrix": [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
      "E": [[{"coef": 1.0, "powers": [0, 2, 0]}], [], []]
    },
    "eps": 0.01, "h": 0.05, "t_end": 1.0, "method": "boris", "start_policy": "raw",
    "x0": [0, 0, 0], "v0": [0, 0, 1]})");
  CHECK(!build_field_model(cq.field, cq.eps).E_affine);

  // B1 with nonzero trace has no cross-form vector potential
  ScenarioConfig ct = parse_scenario_config(R"({
    "field": {"B1_matrix": [[0.5, 0, 0], [0, 0, 0], [0, 0, 0]]},
    "eps": 0.01, "h": 0.05, "t_end": 1.0, "method": "boris", "start_policy": "raw",
    "x0": [0, 0, 0], "v0": [0, 0, 1]})");
  CHECK_THROWS_AS((void)build_field_model(ct.field, ct.eps), ConfigError);
}

TEST_CASE("step counts and sample thinning") {
  ScenarioConfig c = parse_scenario_config(kScenario);
  c.t_end = 1.0;
  c.h = 0.1;
  CHECK(scenario_steps(c) == 10);
  c.t_end = 1.05;
  CHECK(scenario_steps(c) == 11);
  CHECK(resolve_sample_every(c) == 4);  // explicit value wins
  c.sample_every = 0;
  CHECK(resolve_sample_every(c) == 1);  // small runs keep every step
  c.t_end = 25000.0;
  c.h = 0.01;  // 2.5e6 steps -> thin by 3 to stay near 1e6 samples
  CHECK(resolve_sample_every(c) == 3);
}

TEST_CASE("doubles survive the CSV round trip unchanged") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  for (double v : {1.0 / 3.0, 0.1, 2.5e6, 1e-17, -0.0254, 6.283185307179586}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("scenario runs reproduce a direct integration and write both artifacts") {
  ScenarioConfig c = parse_scenario_config(R"({
    "field": "uniform", "eps": 0.5, "h": 0.1, "t_end": 1.0,
    "method": "boris", "start_policy": "raw",
    "x0": [0.2, -0.1, 0.4], "v0": [0.6, -0.3, 0.25],
    "output": "harness_run.csv"})");
  ScenarioResult r = run_scenario(c);
  REQUIRE(r.traj.size() == 11);

  FieldModel m = build_field_model(c.field, c.eps);
  Trajectory direct = integrate(m, c.method, c.start_policy, c.x0, c.v0, c.h, 10, {}, 1);
  CHECK(norm(r.traj.xs.back() - direct.xs.back()) == 0.0);

  const std::string csv = slurp("harness_run.csv");
  CHECK(first_line(csv) == "t,x1,x2,x3,v1,v2,v3,H_err,I_err");
  const std::string summary = slurp("harness_run.csv.summary.json");
  CHECK(summary.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(summary.find("\"steps\": 10") != std::string::npos);
  CHECK(summary.find("\"final_t\": 1.0") != std::string::npos);
}

TEST_CASE("sweeps snap the evaluation time and agree across thread counts") {
  const char* cfg_text = R"({
    "base": {
      "field": "uniform", "eps": 1.0, "h": 0.1, "t_end": 1.0,
      "method": "boris", "start_policy": "raw",
      "x0": [0.2, -0.1, 0.4], "v0": [0.6, -0.3, 0.25],
      "output": "harness_sweep_serial.csv"},
    "eps_list": [0.25, 0.125], "h_list": [0.1, 0.05],
    "methods": ["boris"], "policies": ["raw", "modified"],
    "t_eval": 1.5707963267948966
  })";
  SweepConfig cfg = parse_sweep_config(cfg_text);
  SweepResult serial = run_convergence_sweep(cfg, 1);
  CHECK(serial.t_eval_snapped == doctest::Approx(1.6).epsilon(1e-15));
  REQUIRE(serial.rows.size() == 8);
  // sorted by method, policy, eps, h
  CHECK(serial.rows[0].policy == StartPolicy::Raw);
  CHECK(serial.rows[0].eps == 0.125);
  CHECK(serial.rows[0].h == 0.05);
  for (const SweepRow& row : serial.rows) {
    CHECK(row.status == "ok");
    CHECK(row.err.err_x < 1.0);
  }

  SweepConfig cfg4 = parse_sweep_config(cfg_text);
  cfg4.base.output = "harness_sweep_parallel.csv";
  (void)run_convergence_sweep(cfg4, 4);
  CHECK(slurp("harness_sweep_serial.csv") == slurp("harness_sweep_parallel.csv"));

  SweepConfig bad = parse_sweep_config(cfg_text);
  bad.h_list = {0.1, 0.07};  // 0.07 does not divide the snapped 1.6
  CHECK_THROWS_AS((void)run_convergence_sweep(bad, 1), ConfigError);

  CHECK_THROWS_AS((void)parse_sweep_config(R"({"base": {}, "h_list": [0.1]})"), ConfigError);
  CHECK_THROWS_AS((void)parse_sweep_config("[]"), ConfigError);
}

TEST_CASE("drift runs record the transverse gap against the slow flow") {
  ScenarioConfig c = parse_scenario_config(R"({
    "field": "harmonic", "eps": 0.01, "h": 0.05, "t_end": 5.0,
    "method": "boris", "start_policy": "modified",
    "x0": [0.3, 0.2, -1.4], "v0": [-0.7, 0.08, 0.2],
    "output": "harness_drift.csv"})");
  DriftResult r = run_drift_experiment(c);
  CHECK(r.sup_deviation > 0.0);
  CHECK(r.sup_deviation < 0.1);
  CHECK(first_line(slurp("harness_drift.csv")) == "t,xp1,xp2,xp3,yp1,yp2,yp3,dev");
  CHECK(slurp("harness_drift.csv.summary.json").find("sup_drift_deviation") != std::string::npos);
}

TEST_CASE("perturbed energy reruns are seed-deterministic") {
  ScenarioConfig c = parse_scenario_config(R"({
    "field": "quartic", "eps": 0.001, "h": 0.01, "t_end": 10.0,
    "method": "boris", "start_policy": "modified",
    "x0": [0, 1, 0.1], "v0": [0.09, 0.05, 0.2],
    "output": "harness_energy.csv"})");
  EnergyOptions opts;
  opts.perturb = 1e-3;
  opts.trials = 3;
  opts.seed_given = true;
  opts.seed = 42;
  EnergyResult a = run_longtime_energy(c, opts);
  EnergyResult b = run_longtime_energy(c, opts);
  REQUIRE(a.trials.size() == 3);
  REQUIRE(b.trials.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.trials[i].max_H_err == b.trials[i].max_H_err);
    CHECK(a.trials[i].max_I_err == b.trials[i].max_I_err);
    CHECK(!a.trials[i].blew_up);
  }
  opts.seed = 43;
  EnergyResult d = run_longtime_energy(c, opts);
  bool differs = false;
  for (std::size_t i = 0; i < 3; ++i) differs |= d.trials[i].max_H_err != a.trials[i].max_H_err;
  CHECK(differs);
  CHECK(first_line(slurp("harness_energy.csv")) == "t,H_err,I_err");
}

TEST_CASE("resonance screening matches the documented margins") {
  ResonanceCheck r = check_resonance_cmd(0.1, 0.01, 2);
  CHECK(r.margin == doctest::Approx(0.28366218546322625).epsilon(1e-15));
  CHECK(r.offending_k == 1);
  CHECK(!r.resonant);
  ResonanceCheck tight = check_resonance_cmd(0.1, 0.01, 2, 0.3);
  CHECK(tight.resonant);
  CHECK_THROWS_AS((void)check_resonance_cmd(0.0, 0.01, 2), ConfigError);
  CHECK_THROWS_AS((void)check_resonance_cmd(0.1, 0.01, 0), ConfigError);
}
