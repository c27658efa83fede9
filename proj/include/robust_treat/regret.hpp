#pragma once

#include <Eigen/Dense>

#include "robust_treat/model.hpp"
#include "robust_treat/rules.hpp"

namespace robust_treat {

/// Endpoint-supported member of the prior class. The marginal on the mean is
/// uniform on {mu_bar, -mu_bar}; q_plus is the conditional mass on the upper
/// endpoint at mu_bar (the rest sits on the lower endpoint), q_minus the same
/// at -mu_bar. Sup-over-class computations only need these members because
/// Bayes regret is linear in the conditional law of the welfare contrast.
struct GammaPrior {
  double q_plus = 0.5;
  double q_minus = 0.5;
};

/// Acceptance probabilities at the two prior support points.
struct AcceptancePair {
  double plus = 0.5;   // E_{mu_bar}[d]
  double minus = 0.5;  // E_{-mu_bar}[d]
};

struct WorstCaseRegret {
  double value = 0.0;
  GammaPrior argmax;
};

struct PosteriorWeight {
  double p_plus = 0.5;
};

/// Pointwise regret of taking action `acceptance` when the welfare contrast is u.
double regret_of_action(double u, double acceptance);

/// u * (1{u >= 0} - E_mu[d]).
double expected_regret(const DecisionRule& rule, const Eigen::VectorXd& mu, double u,
                       const Eigen::MatrixXd& sigma);

AcceptancePair acceptance_pair(const DecisionRule& rule, const ProblemSpec& spec);

double bayes_regret(const AcceptancePair& acceptance, const GammaPrior& prior,
                    const ProblemSpec& spec);
double bayes_regret(const DecisionRule& rule, const GammaPrior& prior, const ProblemSpec& spec);

/// Closed-form sup over the prior class and an attaining endpoint prior.
/// Ties between the two endpoints at a support point go to q = 1.
WorstCaseRegret worst_case_bayes_regret(const AcceptancePair& acceptance,
                                        const ProblemSpec& spec);
WorstCaseRegret worst_case_bayes_regret(const DecisionRule& rule, const ProblemSpec& spec);

/// Posterior probability of mu = mu_bar given Y: logistic(2 w'Y).
PosteriorWeight posterior_weight(const Eigen::VectorXd& y, const ProblemSpec& spec);
PosteriorWeight posterior_weight_from_index(double index);

/// Sup over the prior class of the posterior expected regret of action `a`,
/// normalized by the marginal likelihood of Y.
double posterior_gamma_objective(double a, const Eigen::VectorXd& y, const ProblemSpec& spec);
double posterior_gamma_objective_at_index(double a, double index, const ProblemSpec& spec);

/// Worst-case expected regret over the identified set [mu - k, mu + k] of the
/// scalar external-validity model, as a function of the true mean mu.
double profiled_regret(const DecisionRule& rule, double mu, const ProblemSpec& scalar_spec);

}  // namespace robust_treat
