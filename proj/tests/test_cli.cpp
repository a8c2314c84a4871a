#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
}

CmdResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + GYRO_CLI_PATH + "\" " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  CmdResult r;
  if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = slurp("cli_stdout.txt");
  r.err = slurp("cli_stderr.txt");
  return r;
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

TEST_CASE("help lists every subcommand") {
  CmdResult r = run_cli("--help");
  CHECK(r.code == 0);
  for (const char* sub : {"simulate", "sweep", "drift", "energy", "check-resonance"})
    CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("simulate runs a scenario end to end") {
  spit("cli_sim.json", R"({
    "field": "harmonic", "eps": 0.01, "h": 0.05, "t_end": 2.0,
    "method": "variational", "start_policy": "modified",
    "x0": [0.3, 0.2, -1.4], "v0": [-0.7, 0.08, 0.2],
    "output": "cli_sim.csv"})");
  CmdResult r = run_cli("simulate cli_sim.json");
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate: 41 samples") != std::string::npos);
  CHECK(r.out.find("final t=2") != std::string::npos);
  CHECK(r.out.find("max|H-H0|=") != std::string::npos);
  CHECK(exists("cli_sim.csv"));
  CHECK(exists("cli_sim.csv.summary.json"));

  // --output redirects both artifacts
  CmdResult r2 = run_cli("simulate cli_sim.json --output cli_sim_redirect.csv");
  CHECK(r2.code == 0);
  CHECK(exists("cli_sim_redirect.csv"));
  CHECK(exists("cli_sim_redirect.csv.summary.json"));
}

TEST_CASE("configuration problems exit with code 1") {
  CHECK(run_cli("simulate does_not_exist.json").code == 1);
  spit("cli_bad.json", "{ not json");
  CmdResult r = run_cli("simulate cli_bad.json");
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  spit("cli_badkey.json", R"({
    "field": "harmonic", "eps": 0.01, "h": 0.05, "t_end": 1.0, "method": "boris",
    "start_policy": "raw", "x0": [0,0,0], "v0": [1,0,0], "bogus": 1})");
  CHECK(run_cli("simulate cli_badkey.json").code == 1);
  CHECK(run_cli("energy cli_sim.json --trials 4").code == 1);  // --trials needs --perturb
  CHECK(run_cli("definitely-not-a-subcommand").code != 0);
}

TEST_CASE("resonance screening prints the margin and gates the filtered method") {
  CmdResult ok = run_cli("check-resonance --h 0.1 --eps 0.01");
  CHECK(ok.code == 0);
  CHECK(ok.out == "margin=0.28366218546322625 offending_k=1 resonant=no\n");

  // h/(2 eps) = pi/2 puts the step on a gyro-phase pole
  CmdResult res = run_cli("check-resonance --h 0.1 --eps 0.031830988618379068");
  CHECK(res.code == 2);
  CHECK(res.out.find("resonant=yes") != std::string::npos);

  spit("cli_resonant.json", R"({
    "field": "harmonic", "eps": 0.031830988618379068, "h": 0.1, "t_end": 1.0,
    "method": "filtered", "start_policy": "raw",
    "x0": [0.3, 0.2, -1.4], "v0": [-0.7, 0.08, 0.2],
    "output": "cli_resonant.csv"})");
  CmdResult sim = run_cli("simulate cli_resonant.json");
  CHECK(sim.code == 2);
  CHECK(sim.err.find("error:") != std::string::npos);
}

TEST_CASE("runaway trajectories exit with code 4") {
  spit("cli_blowup.json", R"({
    "field": {"B1_matrix": [[0,0,0],[0,0,0],[0,0,0]],
              "E": [[], [], [{"coef": 100.0}]]},
    "eps": 0.1, "h": 0.01, "t_end": 6.0,
    "method": "boris", "start_policy": "raw",
    "x0": [0, 0, 0], "v0": [0, 0, 0],
    "output": "cli_blowup.csv"})");
  CmdResult r = run_cli("simulate cli_blowup.json");
  CHECK(r.code == 4);
  CHECK(r.out.find("blow-up at step") != std::string::npos);
}

TEST_CASE("sweep output is identical for serial and parallel runs") {
  spit("cli_sweep.json", R"({
    "base": {
      "field": "uniform", "eps": 1.0, "h": 0.1, "t_end": 1.0,
      "method": "boris", "start_policy": "raw",
      "x0": [0.2, -0.1, 0.4], "v0": [0.6, -0.3, 0.25],
      "output": "cli_sweep_serial.csv"},
    "eps_list": [0.25], "h_list": [0.1, 0.05],
    "methods": ["boris"], "policies": ["raw"],
    "t_eval": 1.5707963267948966
  })");
  CmdResult a = run_cli("sweep cli_sweep.json --jobs 1");
  CHECK(a.code == 0);
  CHECK(a.out.find("sweep: 2 cells at t=1.6") != std::string::npos);
  CmdResult b = run_cli("sweep cli_sweep.json --jobs 4 --output cli_sweep_parallel.csv");
  CHECK(b.code == 0);
  const std::string serial = slurp("cli_sweep_serial.csv");
  CHECK(!serial.empty());
  CHECK(serial == slurp("cli_sweep_parallel.csv"));
}

TEST_CASE("drift reports the gap to the slow flow") {
  spit("cli_drift.json", R"({
    "field": "harmonic", "eps": 0.01, "h": 0.05, "t_end": 5.0,
    "method": "boris", "start_policy": "modified",
    "x0": [0.3, 0.2, -1.4], "v0": [-0.7, 0.08, 0.2],
    "output": "cli_drift.csv"})");
  CmdResult r = run_cli("drift cli_drift.json");
  CHECK(r.code == 0);
  CHECK(r.out.find("sup deviation from drift flow: ") != std::string::npos);
  CHECK(exists("cli_drift.csv"));
}
