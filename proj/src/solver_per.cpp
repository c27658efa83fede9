#include "robust_treat/solver_per.hpp"

namespace robust_treat {

PerSolution solve_per(const ProblemSpec& spec) {
  require_normalized(spec, "solve_per");
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  const EfficientIndex index = efficient_index(spec);
  const bool ambiguous = b.lower < 0.0 && 0.0 < b.upper;
  DecisionRule threshold(Threshold{index.w, 0.0});
  if (!ambiguous) return {threshold, threshold, false};
  const double width = b.upper - b.lower;
  DecisionRule step(TwoStep{index.w, -b.lower / width, b.upper / width});
  return {step, threshold, true};
}

double per_action_at_index(const PerSolution& solution, double t) {
  return evaluate_index(solution.randomized_rule, t);
}

AgreementReport classify_agreement(const ProblemSpec& spec) {
  require_normalized(spec, "classify_agreement");
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  const Regime regime = classify_regime(spec);
  return {b.lower >= 0.0, regime.tag == RegimeTag::CaseI};
}

}  // namespace robust_treat
