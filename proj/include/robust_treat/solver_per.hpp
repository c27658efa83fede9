#pragma once

#include "robust_treat/model.hpp"
#include "robust_treat/rules.hpp"

namespace robust_treat {

// Ex-post optimal rules. The randomized rule mixes at the two endpoint
// ratios when the sign of the welfare contrast at mu_bar is ambiguous.
struct PerSolution {
  DecisionRule randomized_rule;
  DecisionRule nonrandomized_rule;
  bool ambiguous_sign = false;
};

// Whether the ex-ante and ex-post criteria pick a common rule.
struct AgreementReport {
  bool with_randomization = false;
  bool without_randomization = false;
};

PerSolution solve_per(const ProblemSpec& spec);

// Action taken by the randomized ex-post rule at index value t = w'Y.
double per_action_at_index(const PerSolution& solution, double t);

AgreementReport classify_agreement(const ProblemSpec& spec);

}  // namespace robust_treat
