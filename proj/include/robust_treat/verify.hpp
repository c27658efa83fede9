#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robust_treat/model.hpp"
#include "robust_treat/serialize.hpp"
#include "robust_treat/solver_mmr.hpp"

namespace robust_treat {

struct VerifyOptions {
  MmrOverrides overrides;
  double closed_form_tol = kClosedFormTol;
  double quadrature_tol = kQuadratureTol;
  double oracle_tol = 1e-3;
  std::int64_t mc_draws = 1'000'000;
  double mc_sigmas = 4.0;
  std::uint64_t seed = 20240611;
  int knots = 400;
  int action_levels = 21;
  int per_probes = 100;
  std::int64_t per_grid = 10'000;
  int threshold_grid = 2000;
  int symmetry_draws = 100;
};

struct CheckResult {
  std::string name;
  double tol = 0.0;
  double residual = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string label;
  std::vector<CheckResult> checks;
  bool passed = false;
};

/// Runs every check that applies to `spec`: solver certificates, moment
/// conditions (quadrature and Monte Carlo), threshold suboptimality, the
/// brute-force minimax oracle, ex-post pointwise optimality, agreement,
/// reflection symmetry and the equilibrium audit.
VerifyReport run_verification(const ProblemSpec& spec, const VerifyOptions& options = {});

Json to_json(const VerifyReport& report);

}  // namespace robust_treat
