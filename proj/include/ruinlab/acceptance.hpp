#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ruinlab/model.hpp"

namespace ruinlab::acceptance {

struct Options {
  std::size_t workers = 0;
  std::uint64_t seed = 20240601;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Point-mass regime (0.06, 0.02), exponential(1) claims and inter-arrivals,
/// premium c = c_bar = 0.1; beta = 2.
ModelConfig beta2_config();

/// As beta2_config with deterministic unit inter-arrival times.
ModelConfig beta2_unit_tau_config();

/// Investment disabled, exponential(1) claims and inter-arrivals, c = 2.
ModelConfig classical_config();

inline constexpr int kCriteria = 9;

CriterionResult run_criterion(int id, const Options& options);

/// "quick" = {1, 2, 3, 4, 8}, "full" = 1..9.
std::vector<int> suite_ids(const std::string& suite);
std::vector<CriterionResult> run_suite(const std::string& suite, const Options& options);

/// One line: "criterion <id> <name>: PASS|FAIL (<detail>) [<seconds>s]".
std::string format_line(const CriterionResult& r);

}  // namespace ruinlab::acceptance
