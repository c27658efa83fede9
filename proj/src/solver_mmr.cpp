#include "robust_treat/solver_mmr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"

namespace robust_treat {
namespace {

struct Setup {
  IdentifiedBounds bounds;
  EfficientIndex index;
  Regime regime;
};

Setup setup(const ProblemSpec& spec, const char* caller) {
  require_normalized(spec, caller);
  return {bounds_at(spec, spec.mu_bar()), efficient_index(spec), classify_regime(spec)};
}

Setup require_case_ii(const ProblemSpec& spec, const char* caller) {
  Setup s = setup(spec, caller);
  if (s.regime.tag != RegimeTag::CaseII) {
    std::ostringstream msg;
    msg << caller << ": only defined when upper/(upper-lower) = " << s.regime.ratio
        << " is below Phi(||w||) = " << s.regime.phi_norm;
    throw Error(ErrorKind::Regime, msg.str());
  }
  return s;
}

// G(t) = t Phi(t) + phi(t), an antiderivative of Phi.
double phi_antiderivative(double t) {
  return t * gauss::std_normal_cdf(t) + gauss::std_normal_pdf(t);
}

}  // namespace

double minimax_value(const ProblemSpec& spec) {
  const Setup s = setup(spec, "minimax_value");
  if (s.regime.tag == RegimeTag::CaseI) {
    return s.bounds.upper * gauss::std_normal_sf(s.index.norm);
  }
  return -s.bounds.upper * s.bounds.lower / (s.bounds.upper - s.bounds.lower);
}

double sigma_tilde(const ProblemSpec& spec) {
  const Setup s = require_case_ii(spec, "sigma_tilde");
  const double q = gauss::std_normal_quantile(s.regime.ratio);
  const double norm = s.index.norm;
  // sqrt((||w||^2 / q)^2 - ||w||^2), factored to keep precision near the boundary.
  return norm * std::sqrt((norm / q - 1.0) * (norm / q + 1.0));
}

double clamped_linear_acceptance_at_mu_bar(double rho, double index_norm) {
  const double n2 = index_norm * index_norm;
  return 1.0 - (index_norm / (2.0 * rho)) *
                   (phi_antiderivative((rho - n2) / index_norm) -
                    phi_antiderivative((-rho - n2) / index_norm));
}

double rho_star(const ProblemSpec& spec) {
  const Setup s = require_case_ii(spec, "rho_star");
  const double target = s.regime.ratio;
  const double norm = s.index.norm;
  const auto f = [&](double rho) { return clamped_linear_acceptance_at_mu_bar(rho, norm); };

  double lo = 1e-8;
  double hi = 2.0 * norm * norm / (2.0 * target - 1.0);
  int expansions = 0;
  while (f(hi) >= target && expansions < 200) {
    hi *= 2.0;
    ++expansions;
  }
  if (!(f(lo) > target && f(hi) < target)) {
    std::ostringstream msg;
    msg << "rho_star: no sign change on bracket [" << lo << ", " << hi << "]: f(lo) = " << f(lo)
        << ", f(hi) = " << f(hi) << ", target = " << target;
    throw Error(ErrorKind::Numeric, msg.str());
  }
  for (int iter = 0; iter < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = 0.5 * (lo + hi);
  if (std::abs(f(root) - target) > kClosedFormTol) {
    std::ostringstream msg;
    msg << "rho_star: bisection stalled on [" << lo << ", " << hi
        << "] with residual " << f(root) - target;
    throw Error(ErrorKind::Numeric, msg.str());
  }
  return root;
}

double beta_star(const ProblemSpec& spec) {
  const Setup s = require_case_ii(spec, "beta_star");
  return (s.regime.ratio - 0.5) / (2.0 * s.regime.phi_norm - 1.0);
}

double c_star(const ProblemSpec& spec) {
  const Setup s = require_case_ii(spec, "c_star");
  return s.index.norm * (s.index.norm - gauss::std_normal_quantile(s.regime.ratio));
}

double threshold_worst_case_regret(const ProblemSpec& spec, double c) {
  const EfficientIndex index = efficient_index(spec);
  return worst_case_bayes_regret(DecisionRule(Threshold{index.w, c}), spec).value;
}

TStarResult t_star(const ProblemSpec& spec, const std::optional<Eigen::VectorXd>& mu_dot) {
  if (spec.n() < 2) {
    throw Error(ErrorKind::Dimension, "t_star: purified threshold rules need n > 1");
  }
  const Setup s = require_case_ii(spec, "t_star");
  const Eigen::VectorXd& w = s.index.w;

  Eigen::VectorXd direction;
  if (mu_dot) {
    direction = *mu_dot;
    if (direction.size() != spec.n()) {
      throw Error(ErrorKind::Dimension, "t_star: mu_dot has the wrong dimension");
    }
    if (direction.norm() == 0.0) {
      throw Error(ErrorKind::Precondition, "t_star: mu_dot must be nonzero");
    }
    if (std::abs(direction.dot(w)) > 1e-10 * std::max(1.0, direction.norm() * w.norm())) {
      throw Error(ErrorKind::Precondition,
                  "t_star: mu_dot must satisfy mu_dot' Sigma^-1 mu_bar = 0");
    }
  } else {
    for (Eigen::Index i = 0; i < spec.n(); ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(spec.n(), i);
      Eigen::VectorXd candidate = e - (e.dot(w) / w.squaredNorm()) * w;
      if (candidate.norm() > 1e-8) {
        direction = candidate / candidate.norm();
        break;
      }
    }
  }

  const double q = gauss::std_normal_quantile(s.regime.ratio);
  const double n2 = s.index.norm * s.index.norm;
  const Eigen::VectorXd sigma_inv_dot = spd_solve(spec.sigma(), direction);
  const double dot_norm2 = direction.dot(sigma_inv_dot);

  TStarResult result;
  result.mu_dot = direction;
  result.s_star = q * q / n2;
  const double spread = std::sqrt((1.0 - result.s_star) / result.s_star * n2 / dot_norm2);
  for (double sign : {1.0, -1.0}) {
    const double denom = 1.0 + sign * spread;
    if (std::abs(denom) < 1e-12) continue;
    const double t = 1.0 / denom;
    Eigen::VectorXd w_t = t * w + (1.0 - t) * sigma_inv_dot;
    // Both roots solve the squared moment equation; a negative t points the
    // index away from mu_bar, so the rule is oriented along sign(t) w_t.
    if (t < 0.0) w_t = -w_t;
    DecisionRule rule(Threshold{w_t, 0.0});
    const double accept = acceptance_probability(rule, spec.mu_bar(), spec.sigma()).value;
    if (std::abs(accept - s.regime.ratio) > kClosedFormTol) {
      std::ostringstream msg;
      msg << "t_star: root t = " << t << " gives acceptance " << accept << " instead of "
          << s.regime.ratio;
      throw Error(ErrorKind::Numeric, msg.str());
    }
    result.roots.push_back({t, std::move(rule)});
  }
  return result;
}

MomentCertificate verify_moment_conditions(const DecisionRule& rule, const ProblemSpec& spec,
                                           double tol, std::string label) {
  require_normalized(spec, "verify_moment_conditions");
  const IdentifiedBounds b = bounds_at(spec, spec.mu_bar());
  MomentCertificate cert;
  cert.label = std::move(label);
  cert.tol = tol;
  const double width = b.upper - b.lower;
  cert.target_plus = width > 0.0 ? b.upper / width : 1.0;
  cert.target_minus = width > 0.0 ? -b.lower / width : 0.0;
  const auto plus = acceptance_probability(rule, spec.mu_bar(), spec.sigma());
  const auto minus = acceptance_probability(rule, -spec.mu_bar(), spec.sigma());
  cert.e_plus = plus.value;
  cert.e_minus = minus.value;
  cert.method = (plus.method == AcceptanceMethod::Quadrature ||
                 minus.method == AcceptanceMethod::Quadrature)
                    ? AcceptanceMethod::Quadrature
                    : AcceptanceMethod::ClosedForm;
  cert.residual_plus = cert.e_plus - cert.target_plus;
  cert.residual_minus = cert.e_minus - cert.target_minus;
  cert.passed = std::abs(cert.residual_plus) <= tol && std::abs(cert.residual_minus) <= tol;
  return cert;
}

LfpRecord least_favorable_prior(const ProblemSpec& spec) {
  const Setup s = setup(spec, "least_favorable_prior");
  const IdentifiedBounds minus = bounds_at(spec, -spec.mu_bar());
  LfpRecord lfp;
  if (s.regime.tag == RegimeTag::CaseI) {
    lfp.four_point = false;
    lfp.prior = {1.0, 0.0};
    lfp.support = {{1, s.bounds.upper, 0.5}, {-1, minus.lower, 0.5}};
    return lfp;
  }
  // Conditional masses that zero the conditional mean of the welfare contrast.
  const double p1 = -s.bounds.lower / (s.bounds.upper - s.bounds.lower);
  const double p2 = -minus.lower / (minus.upper - minus.lower);
  lfp.four_point = true;
  lfp.prior = {p1, p2};
  lfp.support = {{1, s.bounds.upper, 0.5 * p1},
                 {1, s.bounds.lower, 0.5 * (1.0 - p1)},
                 {-1, minus.upper, 0.5 * p2},
                 {-1, minus.lower, 0.5 * (1.0 - p2)}};
  return lfp;
}

MmrSolution solve_mmr(const ProblemSpec& spec, const MmrOverrides& overrides) {
  const Setup s = setup(spec, "solve_mmr");
  MmrSolution sol;
  sol.regime = s.regime;
  sol.index = s.index;
  sol.bounds = s.bounds;
  sol.value = minimax_value(spec);
  sol.lfp = least_favorable_prior(spec);
  const Eigen::VectorXd& w = s.index.w;

  if (s.regime.tag == RegimeTag::CaseI) {
    sol.rules.push_back({"d_w0", DecisionRule(Threshold{w, 0.0}), true});
  } else {
    CaseIIConstants k;
    k.sigma_tilde = sigma_tilde(spec);
    k.rho_star = rho_star(spec);
    k.beta_star = beta_star(spec);
    k.c_star = c_star(spec);
    if (spec.n() > 1) k.t_star = t_star(spec);

    const double st = k.sigma_tilde + overrides.sigma_tilde_shift;
    const double rho = k.rho_star + overrides.rho_star_shift;
    const double beta = k.beta_star + overrides.beta_star_shift;
    sol.rules.push_back({"d_rt", DecisionRule(Probit{w, st}), true});
    sol.rules.push_back({"d_linear", DecisionRule(ClampedLinear{w, rho}), true});
    sol.rules.push_back({"d_step", DecisionRule(TwoStep{w, 0.5 - beta, 0.5 + beta}), true});
    if (k.t_star) {
      const char* labels[] = {"d_wt_plus", "d_wt_minus"};
      for (std::size_t i = 0; i < k.t_star->roots.size(); ++i) {
        sol.rules.push_back({labels[i], k.t_star->roots[i].rule, true});
      }
    }
    sol.rules.push_back({"threshold_plus_c", DecisionRule(Threshold{w, k.c_star}), false});
    sol.rules.push_back({"threshold_minus_c", DecisionRule(Threshold{w, -k.c_star}), false});
    sol.constants = std::move(k);
  }

  for (const auto& entry : sol.rules) {
    RuleCertificate cert;
    cert.label = entry.label;
    const AcceptancePair pair = acceptance_pair(entry.rule, spec);
    cert.worst_case = worst_case_bayes_regret(pair, spec).value;
    cert.value_residual = cert.worst_case - sol.value;
    const bool quadrature = entry.rule.get_if<ClampedLinear>() != nullptr ||
                            entry.rule.get_if<Tabulated>() != nullptr;
    const double tol = quadrature ? kQuadratureTol : kClosedFormTol;
    if (s.regime.tag == RegimeTag::CaseII) {
      cert.moments = verify_moment_conditions(entry.rule, spec, tol, entry.label);
    }
    if (entry.optimal) {
      const bool value_ok = std::abs(cert.value_residual) <= tol * std::max(1.0, sol.value);
      cert.passed = value_ok && (!cert.moments || cert.moments->passed);
    } else {
      // Reported suboptimal rules must be strictly worse than the minimax value.
      cert.passed = cert.value_residual > tol;
    }
    sol.certificates.push_back(std::move(cert));
  }
  return sol;
}

}  // namespace robust_treat
