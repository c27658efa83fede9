#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace robust_treat {

class DecisionRule;

/// 1{w'Y >= c}
struct Threshold {
  Eigen::VectorXd w;
  double c = 0.0;
};

/// Phi(w'Y / sigma_tilde); equivalently a threshold at an independent
/// N(0, sigma_tilde^2) draw.
struct Probit {
  Eigen::VectorXd w;
  double sigma_tilde = 1.0;
};

/// clamp((w'Y + rho) / (2 rho), 0, 1)
struct ClampedLinear {
  Eigen::VectorXd w;
  double rho = 1.0;
};

/// lo below the hyperplane w'Y = 0, hi on or above it.
struct TwoStep {
  Eigen::VectorXd w;
  double lo = 0.0;
  double hi = 1.0;
};

struct Constant {
  double a = 0.0;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<DecisionRule> components;
};

/// Piecewise-constant function of t = w'Y. With knots k_0 < ... < k_{m-1},
/// `values` has m + 1 entries: values[0] on (-inf, k_0), values[i] on
/// [k_{i-1}, k_i), values[m] on [k_{m-1}, inf).
struct Tabulated {
  Eigen::VectorXd w;
  std::vector<double> knots;
  std::vector<double> values;
};

/// Decision rule d: R^n -> [0, 1]. Every non-constant family acts through one
/// linear index w'Y. Construction validates the family invariants.
class DecisionRule {
 public:
  using Variant =
      std::variant<Threshold, Probit, ClampedLinear, TwoStep, Constant, Mixture, Tabulated>;

  DecisionRule(Threshold rule);
  DecisionRule(Probit rule);
  DecisionRule(ClampedLinear rule);
  DecisionRule(TwoStep rule);
  DecisionRule(Constant rule);
  DecisionRule(Mixture rule);
  DecisionRule(Tabulated rule);

  const Variant& variant() const { return rule_; }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&rule_);
  }

  std::string_view type_name() const;

 private:
  void validate() const;

  Variant rule_;
};

enum class AcceptanceMethod { ClosedForm, Quadrature };

/// E_mu[d(Y)] together with how it was obtained.
struct AcceptanceProbability {
  double value = 0.0;
  AcceptanceMethod method = AcceptanceMethod::ClosedForm;
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Action of `rule` at data `y`. The boundary w'Y = c takes the upper action.
double evaluate(const DecisionRule& rule, const Eigen::VectorXd& y);

/// Action as a function of the scalar index t = w'Y, for index rules.
double evaluate_index(const DecisionRule& rule, double t);

/// Exact E_mu[d(Y)] for Y ~ N(mu, sigma). Threshold, Probit, TwoStep and
/// Constant use closed forms; ClampedLinear and Tabulated integrate the
/// action against the N(w'mu, w'Sigma w) index density over mean +- 8.5 sd,
/// split at the rule's breakpoints. Mixtures take weighted sums, and are
/// reported as quadrature when any component is.
AcceptanceProbability acceptance_probability(const DecisionRule& rule, const Eigen::VectorXd& mu,
                                             const Eigen::MatrixXd& sigma);

/// Sample mean of d(Y) over `count` draws Y ~ N(mu, sigma) with its standard
/// error, for cross-checking the closed forms.
MonteCarloEstimate mc_acceptance(const DecisionRule& rule, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& sigma, std::int64_t count,
                                 std::uint64_t seed);

}  // namespace robust_treat
