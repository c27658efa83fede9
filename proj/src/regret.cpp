#include "robust_treat/regret.hpp"

#include <algorithm>
#include <cmath>

#include "robust_treat/error.hpp"

namespace robust_treat {
namespace {

struct SupportBounds {
  IdentifiedBounds plus;
  IdentifiedBounds minus;
};

SupportBounds support_bounds(const ProblemSpec& spec) {
  return {bounds_at(spec, spec.mu_bar()), bounds_at(spec, -spec.mu_bar())};
}

// Regret at one support point under conditional mass q on the upper endpoint.
double branch_regret(const IdentifiedBounds& b, double q, double acceptance) {
  return q * regret_of_action(b.upper, acceptance) +
         (1.0 - q) * regret_of_action(b.lower, acceptance);
}

struct BranchMax {
  double value;
  double q;
};

BranchMax branch_max(const IdentifiedBounds& b, double acceptance) {
  const double at_upper = regret_of_action(b.upper, acceptance);
  const double at_lower = regret_of_action(b.lower, acceptance);
  if (at_upper >= at_lower) return {at_upper, 1.0};
  return {at_lower, 0.0};
}

}  // namespace

double regret_of_action(double u, double acceptance) {
  return u * ((u >= 0.0 ? 1.0 : 0.0) - acceptance);
}

double expected_regret(const DecisionRule& rule, const Eigen::VectorXd& mu, double u,
                       const Eigen::MatrixXd& sigma) {
  return regret_of_action(u, acceptance_probability(rule, mu, sigma).value);
}

AcceptancePair acceptance_pair(const DecisionRule& rule, const ProblemSpec& spec) {
  return {acceptance_probability(rule, spec.mu_bar(), spec.sigma()).value,
          acceptance_probability(rule, -spec.mu_bar(), spec.sigma()).value};
}

double bayes_regret(const AcceptancePair& acceptance, const GammaPrior& prior,
                    const ProblemSpec& spec) {
  const SupportBounds b = support_bounds(spec);
  return 0.5 * branch_regret(b.plus, prior.q_plus, acceptance.plus) +
         0.5 * branch_regret(b.minus, prior.q_minus, acceptance.minus);
}

double bayes_regret(const DecisionRule& rule, const GammaPrior& prior, const ProblemSpec& spec) {
  require_normalized(spec, "bayes_regret");
  return bayes_regret(acceptance_pair(rule, spec), prior, spec);
}

WorstCaseRegret worst_case_bayes_regret(const AcceptancePair& acceptance,
                                        const ProblemSpec& spec) {
  const SupportBounds b = support_bounds(spec);
  const BranchMax plus = branch_max(b.plus, acceptance.plus);
  const BranchMax minus = branch_max(b.minus, acceptance.minus);
  return {0.5 * plus.value + 0.5 * minus.value, GammaPrior{plus.q, minus.q}};
}

WorstCaseRegret worst_case_bayes_regret(const DecisionRule& rule, const ProblemSpec& spec) {
  require_normalized(spec, "worst_case_bayes_regret");
  return worst_case_bayes_regret(acceptance_pair(rule, spec), spec);
}

PosteriorWeight posterior_weight_from_index(double index) {
  // Likelihood ratio f(Y | mu_bar) / f(Y | -mu_bar) = exp(2 w'Y).
  if (index >= 0.0) return {1.0 / (1.0 + std::exp(-2.0 * index))};
  const double e = std::exp(2.0 * index);
  return {e / (1.0 + e)};
}

PosteriorWeight posterior_weight(const Eigen::VectorXd& y, const ProblemSpec& spec) {
  const EfficientIndex index = efficient_index(spec);
  if (y.size() != index.w.size()) {
    throw Error(ErrorKind::Dimension, "posterior_weight: data has the wrong dimension");
  }
  return posterior_weight_from_index(index.w.dot(y));
}

double posterior_gamma_objective_at_index(double a, double index, const ProblemSpec& spec) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(ErrorKind::Domain, "posterior_gamma_objective: action must lie in [0,1]");
  }
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  const double p = posterior_weight_from_index(index).p_plus;
  // Bounds at -mu_bar enter through their reflections (-lower, -upper).
  return p * std::max(b.upper * (1.0 - a), -b.lower * a) +
         (1.0 - p) * std::max(b.upper * a, -b.lower * (1.0 - a));
}

double posterior_gamma_objective(double a, const Eigen::VectorXd& y, const ProblemSpec& spec) {
  require_normalized(spec, "posterior_gamma_objective");
  const EfficientIndex index = efficient_index(spec);
  if (y.size() != index.w.size()) {
    throw Error(ErrorKind::Dimension, "posterior_gamma_objective: data has the wrong dimension");
  }
  return posterior_gamma_objective_at_index(a, index.w.dot(y), spec);
}

double profiled_regret(const DecisionRule& rule, double mu, const ProblemSpec& scalar_spec) {
  const ExternalValidityParams* params = external_validity_params(scalar_spec);
  if (params == nullptr || scalar_spec.n() != 1) {
    throw Error(ErrorKind::Domain,
                "profiled_regret is only defined for the scalar external-validity model");
  }
  if (!std::isfinite(mu)) throw Error(ErrorKind::Domain, "profiled_regret: mu must be finite");
  const double k = params->k;
  const double e = acceptance_probability(rule, scalar_vector(mu), scalar_spec.sigma()).value;
  if (mu < -k) return (-mu + k) * e;
  if (mu > k) return (mu + k) * (1.0 - e);
  return std::max((mu + k) * (1.0 - e), (-mu + k) * e);
}

}  // namespace robust_treat
