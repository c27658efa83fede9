#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robust_treat/model.hpp"
#include "robust_treat/regret.hpp"
#include "robust_treat/rules.hpp"
#include "robust_treat/solver_mmr.hpp"
#include "robust_treat/solver_per.hpp"

namespace robust_treat::oracle {

/// Discretization used by the brute-force minimax search. Knots bin the
/// scalar index t = w'Y; a Tabulated rule assigns one action per bin.
struct MinimaxGrid {
  std::vector<double> index_knots;
  std::vector<double> action_levels;
  std::vector<GammaPrior> prior_grid;
};

/// Uniform knots over the union of mean +- 8.5 sd windows of w'Y under
/// +-mu_bar, equally spaced action levels on [0,1], and a square prior grid
/// that always contains the four corners.
MinimaxGrid make_minimax_grid(const ProblemSpec& spec, int knot_count = 400,
                              int action_count = 21, int prior_side = 11);

/// Same grid with a midpoint inserted between every pair of adjacent knots.
MinimaxGrid refine(const MinimaxGrid& grid);

struct MinimaxSearch {
  double value = 0.0;           // continuous boundary randomization
  double discrete_value = 0.0;  // boundary level restricted to action_levels
  DecisionRule rule{Constant{0.5}};  // Tabulated argmin
  AcceptancePair acceptance;
};

MinimaxSearch brute_force_minimax(const ProblemSpec& spec, const MinimaxGrid& grid);

struct MinimaxReport {
  MinimaxSearch coarse;
  MinimaxSearch refined;
  double closed_form = 0.0;
  double gap = 0.0;          // coarse.value - closed_form
  double refined_gap = 0.0;  // refined.value - closed_form
  double refinement_step = 0.0;  // coarse.value - refined.value
  bool monotone = false;
  bool too_coarse = false;
};

/// Runs the search on `grid` and on its refinement and compares both with
/// the closed-form minimax value. `cauchy_tol` bounds the refinement step.
MinimaxReport minimax_report(const ProblemSpec& spec, const MinimaxGrid& grid,
                             double cauchy_tol = 1e-3);

/// Grid argmin of the ex-post objective at data y; ties go to the smallest action.
double brute_force_per(const ProblemSpec& spec, const Eigen::VectorXd& y,
                       std::int64_t action_grid_size);
double brute_force_per_at_index(const ProblemSpec& spec, double index,
                                std::int64_t action_grid_size);

struct DominanceReport {
  std::vector<double> mu;
  std::vector<double> value_a;
  std::vector<double> value_b;
  bool a_weakly_above = false;           // R(a, mu) >= R(b, mu) on the grid
  bool a_strictly_above_off_zero = false;  // strict wherever mu != 0
  bool all_equal = false;
  double min_gap_off_zero = 0.0;
  double tie_tol = 0.0;
};

/// Profiled regrets differing by at most `tie_tol` count as equal; this
/// absorbs quadrature rounding at points where two rules tie exactly.
DominanceReport dominance_scan(const DecisionRule& rule_a, const DecisionRule& rule_b,
                               const ProblemSpec& scalar_spec, const std::vector<double>& mu_grid,
                               double tie_tol = 1e-12);

struct AuditCheck {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool passed = false;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool passed = false;
};

AuditReport equilibrium_audit(const MmrSolution& solution, const ProblemSpec& spec,
                              int probe_count = 32, std::uint64_t seed = 20240611);

/// Agreement decided by rule identity: an ex-post rule agrees when its
/// worst-case Bayes regret reaches the minimax value within `tol`.
AgreementReport rule_identity_agreement(const ProblemSpec& spec, double tol = 1e-9);

std::vector<double> linspace(double lo, double hi, std::int64_t count);

}  // namespace robust_treat::oracle
