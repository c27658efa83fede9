#include "robust_treat/model.hpp"

#include <cmath>
#include <sstream>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"

namespace robust_treat {
namespace {

std::string describe_bounds(const IdentifiedBounds& b) {
  std::ostringstream out;
  out << "(" << b.lower << ", " << b.upper << ")";
  return out.str();
}

}  // namespace

std::string_view to_string(RegimeTag tag) {
  return tag == RegimeTag::CaseI ? "CaseI" : "CaseII";
}

ProblemSpec::ProblemSpec(Eigen::MatrixXd sigma, Eigen::VectorXd mu_bar, BoundsFn bounds,
                         std::string label, ModelParams params)
    : sigma_(std::move(sigma)),
      mu_bar_(std::move(mu_bar)),
      bounds_(std::make_shared<const BoundsFn>(std::move(bounds))),
      label_(std::move(label)),
      params_(std::move(params)) {
  if (mu_bar_.size() == 0) {
    throw Error(ErrorKind::DegenerateSpec, "mu_bar must be non-empty");
  }
  if (sigma_.rows() != mu_bar_.size() || sigma_.cols() != mu_bar_.size()) {
    throw Error(ErrorKind::Dimension, "covariance and mu_bar dimensions differ");
  }
  if (!mu_bar_.allFinite()) {
    throw Error(ErrorKind::Domain, "mu_bar must be finite");
  }
  if (mu_bar_.isZero(0.0)) {
    throw Error(ErrorKind::DegenerateSpec,
                "mu_bar must be nonzero (the efficient index w = Sigma^-1 mu_bar vanishes)");
  }
  if (!*bounds_) {
    throw Error(ErrorKind::Precondition, "bounds callback is empty");
  }
  gauss::checked_cholesky(sigma_);
}

ProblemSpec ProblemSpec::with_flipped_mu_bar() const {
  ProblemSpec copy = *this;
  copy.mu_bar_ = -mu_bar_;
  copy.flipped_ = !flipped_;
  return copy;
}

ProblemSpec make_external_validity(double mu_bar, double sigma, double k) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::Domain, "external-validity: sigma must be positive and finite");
  }
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw Error(ErrorKind::Domain, "external-validity: k must be nonnegative and finite");
  }
  if (mu_bar == 0.0) {
    throw Error(ErrorKind::DegenerateSpec, "external-validity: mu_bar must be nonzero");
  }
  Eigen::MatrixXd cov(1, 1);
  cov(0, 0) = sigma * sigma;
  BoundsFn bounds = [k](const Eigen::VectorXd& mu) {
    return IdentifiedBounds{mu(0) - k, mu(0) + k};
  };
  std::ostringstream label;
  label << "external_validity(mu_bar=" << mu_bar << ", sigma=" << sigma << ", k=" << k << ")";
  ProblemSpec spec(cov, scalar_vector(mu_bar), std::move(bounds), label.str(),
                   ExternalValidityParams{sigma, k});
  return normalize(spec);
}

ProblemSpec make_evidence_aggregation(const Eigen::VectorXd& x0,
                                      const std::vector<EvidenceSite>& sites,
                                      double C, const Eigen::VectorXd& mu_bar) {
  if (sites.empty()) {
    throw Error(ErrorKind::DegenerateSpec, "evidence: at least one site is required");
  }
  if (!(C >= 0.0) || !std::isfinite(C)) {
    throw Error(ErrorKind::Domain, "evidence: C must be nonnegative and finite");
  }
  if (mu_bar.size() != static_cast<Eigen::Index>(sites.size())) {
    throw Error(ErrorKind::Dimension, "evidence: mu_bar needs one entry per site");
  }
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd radius(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& site = sites[static_cast<std::size_t>(i)];
    if (!(site.variance > 0.0) || !std::isfinite(site.variance)) {
      throw Error(ErrorKind::Domain, "evidence: site variances must be positive");
    }
    if (site.x.size() != x0.size()) {
      throw Error(ErrorKind::Dimension, "evidence: site covariate dimension differs from x0");
    }
    cov(i, i) = site.variance;
    radius(i) = C * (site.x - x0).norm();
  }
  if (mu_bar.isZero(0.0)) {
    throw Error(ErrorKind::DegenerateSpec, "evidence: mu_bar must be nonzero");
  }
  BoundsFn bounds = [radius](const Eigen::VectorXd& mu) {
    return IdentifiedBounds{(mu - radius).maxCoeff(), (mu + radius).minCoeff()};
  };
  std::ostringstream label;
  label << "evidence(sites=" << n << ", C=" << C << ")";
  ProblemSpec spec(cov, mu_bar, std::move(bounds), label.str(), EvidenceParams{x0, sites, C});
  // Eager feasibility at both prior support points.
  bounds_at(spec, spec.mu_bar());
  bounds_at(spec, -spec.mu_bar());
  return normalize(spec);
}

IdentifiedBounds bounds_at(const ProblemSpec& spec, const Eigen::VectorXd& mu) {
  if (mu.size() != spec.n()) {
    throw Error(ErrorKind::Dimension, "bounds_at: mean has the wrong dimension");
  }
  const IdentifiedBounds b = spec.raw_bounds(mu);
  if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) {
    throw Error(ErrorKind::InfeasibleSpec, "identified set bounds must be finite");
  }
  if (b.lower > b.upper) {
    throw Error(ErrorKind::InfeasibleSpec,
                "identified set is empty at the requested mean: bounds " + describe_bounds(b));
  }
  return b;
}

ProblemSpec normalize(const ProblemSpec& spec) {
  const IdentifiedBounds at = bounds_at(spec, spec.mu_bar());
  const double sum = at.upper + at.lower;
  const double scale = std::abs(at.upper) + std::abs(at.lower);
  if (std::abs(sum) <= 1e-14 * scale || sum == 0.0) {
    throw Error(ErrorKind::KnifeEdge,
                "upper + lower bound at mu_bar is zero; the sign normalization is undefined");
  }
  if (sum > 0.0) return spec;
  ProblemSpec flipped = spec.with_flipped_mu_bar();
  const IdentifiedBounds reflected = bounds_at(flipped, flipped.mu_bar());
  if (!(reflected.upper + reflected.lower > 0.0)) {
    throw Error(ErrorKind::Precondition,
                "bounds callback is not reflection symmetric: flipping mu_bar did not change the "
                "sign of upper + lower");
  }
  return flipped;
}

bool is_normalized(const ProblemSpec& spec) {
  const IdentifiedBounds at = bounds_at(spec, spec.mu_bar());
  return at.upper + at.lower > 0.0;
}

void require_normalized(const ProblemSpec& spec, const char* caller) {
  if (!is_normalized(spec)) {
    throw Error(ErrorKind::Precondition,
                std::string(caller) + ": spec is not normalized (upper + lower <= 0 at mu_bar)");
  }
}

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& rhs) {
  const auto llt = gauss::checked_cholesky(sigma);
  Eigen::VectorXd x = llt.solve(rhs);
  if (!x.allFinite()) {
    throw Error(ErrorKind::LinearAlgebra, "SPD solve produced non-finite values");
  }
  return x;
}

EfficientIndex efficient_index(const ProblemSpec& spec) {
  require_normalized(spec, "efficient_index");
  EfficientIndex index;
  index.w = spd_solve(spec.sigma(), spec.mu_bar());
  const double quad_form = index.w.dot(spec.mu_bar());
  const double sigma_form = index.w.dot(spec.sigma() * index.w);
  if (!(quad_form > 0.0) ||
      std::abs(quad_form - sigma_form) > 1e-10 * std::max(1.0, quad_form)) {
    throw Error(ErrorKind::LinearAlgebra,
                "efficient index failed the w'mu_bar = w'Sigma w consistency check");
  }
  index.norm = std::sqrt(quad_form);
  return index;
}

Regime classify_regime(const ProblemSpec& spec) {
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  const EfficientIndex index = efficient_index(spec);
  Regime regime;
  regime.ratio = (b.upper == b.lower) ? 1.0 : b.upper / (b.upper - b.lower);
  regime.phi_norm = gauss::std_normal_cdf(index.norm);
  regime.tag = regime.ratio >= regime.phi_norm ? RegimeTag::CaseI : RegimeTag::CaseII;
  return regime;
}

}  // namespace robust_treat
