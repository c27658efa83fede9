#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robust_treat/model.hpp"
#include "robust_treat/regret.hpp"
#include "robust_treat/rules.hpp"

namespace robust_treat {

/// Closed-form identities are checked at this tolerance, quadrature-backed
/// ones at kQuadratureTol.
inline constexpr double kClosedFormTol = 1e-10;
inline constexpr double kQuadratureTol = 1e-8;

struct LabeledRule {
  std::string label;
  DecisionRule rule;
  bool optimal = true;  // false for reported-but-suboptimal rules (best thresholds)
};

/// Residuals of the two moment conditions E_{-mu_bar}[d] = -lower/(upper-lower)
/// and E_{mu_bar}[d] = upper/(upper-lower).
struct MomentCertificate {
  std::string label;
  double e_minus = 0.0;
  double e_plus = 0.0;
  double target_minus = 0.0;
  double target_plus = 0.0;
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  double tol = 0.0;
  AcceptanceMethod method = AcceptanceMethod::ClosedForm;
  bool passed = false;
};

/// Per-rule record attached to a solution.
struct RuleCertificate {
  std::string label;
  double worst_case = 0.0;
  double value_residual = 0.0;  // worst_case - solution value
  std::optional<MomentCertificate> moments;  // CaseII only
  bool passed = false;
};

struct LfpSupportPoint {
  int mu_sign = 1;  // +1 for mu_bar, -1 for -mu_bar
  double u = 0.0;
  double mass = 0.0;
};

/// Least favorable prior. CaseI: two points, all conditional mass on the
/// upper endpoint at mu_bar and the lower endpoint at -mu_bar. CaseII: four
/// points whose conditional means of the welfare contrast are zero, which
/// makes the data uninformative.
struct LfpRecord {
  bool four_point = false;
  GammaPrior prior;
  std::vector<LfpSupportPoint> support;
};

struct TStarRoot {
  double t = 0.0;
  DecisionRule rule;
};

struct TStarResult {
  double s_star = 0.0;
  Eigen::VectorXd mu_dot;
  std::vector<TStarRoot> roots;  // "+" root first
};

/// Constants that only exist in CaseII.
struct CaseIIConstants {
  double sigma_tilde = 0.0;
  double rho_star = 0.0;
  double beta_star = 0.0;
  double c_star = 0.0;
  std::optional<TStarResult> t_star;  // n > 1 only
};

struct MmrSolution {
  Regime regime;
  EfficientIndex index;
  IdentifiedBounds bounds;  // at mu_bar
  std::vector<LabeledRule> rules;
  double value = 0.0;
  LfpRecord lfp;
  std::optional<CaseIIConstants> constants;
  std::vector<RuleCertificate> certificates;
};

/// Perturbations applied to the CaseII constants before rules are built.
/// Used only for negative-control verification runs.
struct MmrOverrides {
  double sigma_tilde_shift = 0.0;
  double rho_star_shift = 0.0;
  double beta_star_shift = 0.0;
};

MmrSolution solve_mmr(const ProblemSpec& spec, const MmrOverrides& overrides = {});

double sigma_tilde(const ProblemSpec& spec);

/// Mean of the clamped-linear rule with half-width rho at mu_bar, via
/// G(t) = t Phi(t) + phi(t).
double clamped_linear_acceptance_at_mu_bar(double rho, double index_norm);

double rho_star(const ProblemSpec& spec);
double beta_star(const ProblemSpec& spec);
double c_star(const ProblemSpec& spec);

/// Worst-case Bayes regret of 1{w'Y >= c} as a closed-form function of c.
double threshold_worst_case_regret(const ProblemSpec& spec, double c);

/// Purified threshold rules for n > 1. `mu_dot` must be nonzero and
/// Sigma^{-1}-orthogonal to mu_bar; when absent, the first standard basis
/// vector not parallel to w is orthogonalized against mu_bar.
TStarResult t_star(const ProblemSpec& spec, const std::optional<Eigen::VectorXd>& mu_dot = {});

MomentCertificate verify_moment_conditions(const DecisionRule& rule, const ProblemSpec& spec,
                                           double tol, std::string label = {});

LfpRecord least_favorable_prior(const ProblemSpec& spec);

/// Minimax value in closed form: upper * Phi(-||w||) in CaseI and
/// -upper * lower / (upper - lower) in CaseII.
double minimax_value(const ProblemSpec& spec);

}  // namespace robust_treat
