#pragma once

#include <stdexcept>
#include <string>

namespace gyro {

// A (h, eps) combination too close to a gyrophase resonance for the filtered method.
struct ResonanceError : std::runtime_error {
  double margin;
  int offending_k;
  ResonanceError(const std::string& what, double margin_, int k)
      : std::runtime_error(what), margin(margin_), offending_k(k) {}
};

// Fixed-point iteration of an implicit step failed to reach tolerance.
struct ConvergenceError : std::runtime_error {
  long long step;
  double residual;
  ConvergenceError(const std::string& what, long long step_, double residual_)
      : std::runtime_error(what), step(step_), residual(residual_) {}
};

// Bad scenario/sweep configuration; message names the offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gyro
