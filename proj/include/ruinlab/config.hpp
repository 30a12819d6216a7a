#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruinlab/model.hpp"

namespace ruinlab {

inline constexpr int kConfigVersion = 1;

struct LundbergBlock {
  double tol = 1e-10;
  std::string method = "auto";  // auto | analytic | monte_carlo
  std::size_t mc_samples = 1'000'000;
  double delta = 1e-2;
};

struct RuinBlock {
  std::vector<double> u_grid{10.0, 30.0, 100.0, 300.0};
  std::size_t n_paths = 100'000;
  std::size_t max_steps = 10'000;
  double barrier_multiple = 1e3;
};

struct PerpetuityBlock {
  std::size_t samples = 100'000;
  double rel_tol = 1e-12;
  std::size_t n_max = 1'000'000;
  std::vector<double> tail_grid{200.0, 400.0, 800.0, 1600.0};
};

struct SimulateBlock {
  double u = 10.0;
  std::size_t max_steps = 10'000;
  double barrier_multiple = 1e3;
};

struct ValidateBlock {
  std::string suite = "quick";
};

struct OutputBlock {
  std::optional<std::string> path;
  std::string format = "json";  // json | csv
};

struct ExperimentConfig {
  ModelConfig model;
  std::uint64_t seed = 0;
  LundbergBlock lundberg;
  RuinBlock ruin;
  PerpetuityBlock perpetuity;
  SimulateBlock simulate;
  ValidateBlock validate;
  OutputBlock output;
};

/// Parses and validates a JSON experiment config. Unknown keys are rejected.
/// Throws ConfigError whose field() is the dotted path of the offending key,
/// or "json" with line and column for syntax errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Model block alone (used by tests and the validate suite).
ModelConfig parse_model(const std::string& json_text);

}  // namespace ruinlab
