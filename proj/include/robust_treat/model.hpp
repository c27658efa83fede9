#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace robust_treat {

/// Endpoints of the identified set for the welfare contrast at a given mean.
struct IdentifiedBounds {
  double lower = 0.0;
  double upper = 0.0;
};

using BoundsFn = std::function<IdentifiedBounds(const Eigen::VectorXd&)>;

/// Scalar external-validity model: Y ~ N(mu, sigma^2), |U - mu| <= k.
struct ExternalValidityParams {
  double sigma = 1.0;
  double k = 0.0;
};

struct EvidenceSite {
  Eigen::VectorXd x;
  double variance = 1.0;
};

/// Multi-site aggregation: Y_i ~ N(mu_i, variance_i), Lipschitz constant C
/// links each site's effect to the target site at covariate x0.
struct EvidenceParams {
  Eigen::VectorXd x0;
  std::vector<EvidenceSite> sites;
  double C = 0.0;
};

struct CustomModel {};

using ModelParams = std::variant<ExternalValidityParams, EvidenceParams, CustomModel>;

/// Immutable Gaussian treatment-choice problem.
///
/// Holds the signal covariance, the prior location mu_bar of the symmetric
/// two-point reduced-form prior, and a callback returning the identified-set
/// endpoints at any mean. The constructor validates the covariance (SPD) and
/// mu_bar != 0; it does not normalize. Use `normalize` for that, or the
/// example constructors which return normalized specs.
class ProblemSpec {
 public:
  ProblemSpec(Eigen::MatrixXd sigma, Eigen::VectorXd mu_bar, BoundsFn bounds,
              std::string label, ModelParams params = CustomModel{});

  Eigen::Index n() const { return mu_bar_.size(); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& mu_bar() const { return mu_bar_; }
  const std::string& label() const { return label_; }
  const ModelParams& params() const { return params_; }
  /// True when mu_bar was replaced by -mu_bar during normalization.
  bool flipped() const { return flipped_; }

  /// Raw callback value, unchecked.
  IdentifiedBounds raw_bounds(const Eigen::VectorXd& mu) const { return (*bounds_)(mu); }

  ProblemSpec with_flipped_mu_bar() const;

 private:
  Eigen::MatrixXd sigma_;
  Eigen::VectorXd mu_bar_;
  std::shared_ptr<const BoundsFn> bounds_;
  std::string label_;
  ModelParams params_;
  bool flipped_ = false;
};

/// w = Sigma^{-1} mu_bar together with its Sigma-norm.
struct EfficientIndex {
  Eigen::VectorXd w;
  double norm = 0.0;
};

enum class RegimeTag { CaseI, CaseII };

struct Regime {
  RegimeTag tag = RegimeTag::CaseI;
  double ratio = 1.0;     // upper / (upper - lower) at mu_bar, 1 when point identified
  double phi_norm = 0.5;  // Phi(||w||_Sigma)
};

std::string_view to_string(RegimeTag tag);

ProblemSpec make_external_validity(double mu_bar, double sigma, double k);

ProblemSpec make_evidence_aggregation(const Eigen::VectorXd& x0,
                                      const std::vector<EvidenceSite>& sites,
                                      double C, const Eigen::VectorXd& mu_bar);

/// Identified-set endpoints at `mu`; throws InfeasibleSpec if lower > upper.
IdentifiedBounds bounds_at(const ProblemSpec& spec, const Eigen::VectorXd& mu);

/// Returns the spec with mu_bar oriented so that upper + lower > 0 at mu_bar.
ProblemSpec normalize(const ProblemSpec& spec);

bool is_normalized(const ProblemSpec& spec);

/// Throws Precondition unless `spec` is normalized.
void require_normalized(const ProblemSpec& spec, const char* caller);

EfficientIndex efficient_index(const ProblemSpec& spec);

Regime classify_regime(const ProblemSpec& spec);

/// Solves Sigma x = rhs through the checked Cholesky factor.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& rhs);

inline const ExternalValidityParams* external_validity_params(const ProblemSpec& spec) {
  return std::get_if<ExternalValidityParams>(&spec.params());
}

/// One-element vector, for scalar models.
inline Eigen::VectorXd scalar_vector(double x) {
  Eigen::VectorXd v(1);
  v(0) = x;
  return v;
}

}  // namespace robust_treat
