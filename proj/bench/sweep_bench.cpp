// Times the convergence sweep serial vs parallel on a moderate grid. Not part
// of the test suite; run it by hand to gauge the cell-level speedup.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gyro/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  int reps = 1;
  if (argc > 1) reps = std::atoi(argv[1]);
  if (reps < 1) reps = 1;

  gyro::SweepConfig cfg;
  cfg.base.field.catalog = "harmonic";
  cfg.base.x0 = {0.3, 0.2, -1.4};
  cfg.base.v0 = {-0.7, 0.08, 0.2};
  cfg.base.eps = 1e-3;
  cfg.base.h = 0.1;
  cfg.base.t_end = 1.6;
  cfg.base.output = "bench_sweep.csv";
  for (int j = 6; j <= 12; ++j) cfg.eps_list.push_back(std::pow(0.5, j));
  cfg.h_list = {0.1, 0.05, 0.025};
  cfg.methods = {gyro::MethodKind::Boris, gyro::MethodKind::Variational,
                 gyro::MethodKind::FilteredVariational};
  cfg.policies = {gyro::StartPolicy::Raw, gyro::StartPolicy::Modified};
  cfg.t_eval = 1.6;

  using clock = std::chrono::steady_clock;
  double serial_best = 1e300, parallel_best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = clock::now();
    gyro::SweepResult s = gyro::run_convergence_sweep_serial(cfg);
    serial_best = std::min(serial_best, std::chrono::duration<double>(clock::now() - t0).count());

    t0 = clock::now();
    gyro::SweepResult p = gyro::run_convergence_sweep(cfg, 0);
    parallel_best = std::min(parallel_best, std::chrono::duration<double>(clock::now() - t0).count());

    if (s.rows.size() != p.rows.size()) {
      std::fprintf(stderr, "row count mismatch: %zu vs %zu\n", s.rows.size(), p.rows.size());
      return 1;
    }
  }

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("cells: %zu\n",
              cfg.eps_list.size() * cfg.h_list.size() * cfg.methods.size() * cfg.policies.size());
  std::printf("serial:   %.3f s\n", serial_best);
  std::printf("parallel: %.3f s  (%d threads, speedup %.2fx)\n", parallel_best, threads,
              serial_best / parallel_best);
  return 0;
}
