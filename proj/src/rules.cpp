#include "robust_treat/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"

namespace robust_treat {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_probability(double a) { return a >= 0.0 && a <= 1.0; }

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorKind::Domain, message);
}

void require_index(const Eigen::VectorXd& w, const char* family) {
  if (w.size() == 0 || !w.allFinite()) {
    throw Error(ErrorKind::Domain, std::string(family) + ": index vector must be non-empty and finite");
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double index_of(const Eigen::VectorXd& w, const Eigen::VectorXd& y) {
  if (w.size() != y.size()) {
    throw Error(ErrorKind::Dimension, "rule index and data dimensions differ");
  }
  return w.dot(y);
}

struct IndexLaw {
  double mean;
  double sd;
};

IndexLaw index_law(const Eigen::VectorXd& w, const Eigen::VectorXd& mu,
                   const Eigen::MatrixXd& sigma) {
  if (w.size() != mu.size() || sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
    throw Error(ErrorKind::Dimension, "acceptance_probability: inconsistent dimensions");
  }
  const double variance = w.dot(sigma * w);
  if (!(variance > 0.0)) {
    throw Error(ErrorKind::DegenerateIndex, "index variance w'Sigma w is zero");
  }
  return {w.dot(mu), std::sqrt(variance)};
}

// Integral of action(t) * N(t; law) over the clipped window, split at the
// given breakpoints so every piece is smooth.
double index_quadrature(const std::function<double(double)>& action, const IndexLaw& law,
                        std::vector<double> breaks) {
  const double lo = law.mean - gauss::kTailClip * law.sd;
  const double hi = law.mean + gauss::kTailClip * law.sd;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double b) { return !(b > lo && b < hi); }),
               breaks.end());
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto integrand = [&](double t) {
    const double z = (t - law.mean) / law.sd;
    return action(t) * gauss::std_normal_pdf(z) / law.sd;
  };
  constexpr double kPanelsPerWindow = 24.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double width = breaks[i + 1] - breaks[i];
    const int panels =
        std::max(1, static_cast<int>(std::ceil(kPanelsPerWindow * width / (hi - lo))));
    total += gauss::integrate(integrand, breaks[i], breaks[i + 1], panels);
  }
  return clamp01(total);
}

}  // namespace

DecisionRule::DecisionRule(Threshold rule) : rule_(std::move(rule)) { validate(); }
DecisionRule::DecisionRule(Probit rule) : rule_(std::move(rule)) { validate(); }
DecisionRule::DecisionRule(ClampedLinear rule) : rule_(std::move(rule)) { validate(); }
DecisionRule::DecisionRule(TwoStep rule) : rule_(std::move(rule)) { validate(); }
DecisionRule::DecisionRule(Constant rule) : rule_(rule) { validate(); }
DecisionRule::DecisionRule(Mixture rule) : rule_(std::move(rule)) { validate(); }
DecisionRule::DecisionRule(Tabulated rule) : rule_(std::move(rule)) { validate(); }

void DecisionRule::validate() const {
  std::visit(
      overloaded{
          [](const Threshold& r) {
            require_index(r.w, "threshold");
            require(std::isfinite(r.c), "threshold: c must be finite");
          },
          [](const Probit& r) {
            require_index(r.w, "probit");
            require(r.sigma_tilde > 0.0 && std::isfinite(r.sigma_tilde),
                    "probit: sigma_tilde must be positive");
          },
          [](const ClampedLinear& r) {
            require_index(r.w, "clamped-linear");
            require(r.rho > 0.0 && std::isfinite(r.rho), "clamped-linear: rho must be positive");
          },
          [](const TwoStep& r) {
            require_index(r.w, "two-step");
            require(is_probability(r.lo) && is_probability(r.hi),
                    "two-step: levels must lie in [0,1]");
          },
          [](const Constant& r) { require(is_probability(r.a), "constant: action must lie in [0,1]"); },
          [](const Mixture& r) {
            require(!r.components.empty(), "mixture: needs at least one component");
            require(r.weights.size() == r.components.size(),
                    "mixture: one weight per component is required");
            double total = 0.0;
            for (double weight : r.weights) {
              require(weight >= 0.0 && std::isfinite(weight), "mixture: weights must be nonnegative");
              total += weight;
            }
            require(std::abs(total - 1.0) <= 1e-12, "mixture: weights must sum to one");
          },
          [](const Tabulated& r) {
            require_index(r.w, "tabulated");
            require(r.values.size() == r.knots.size() + 1,
                    "tabulated: need exactly one more value than knots");
            for (std::size_t i = 1; i < r.knots.size(); ++i) {
              require(r.knots[i - 1] < r.knots[i], "tabulated: knots must be strictly increasing");
            }
            for (double v : r.values) require(is_probability(v), "tabulated: values must lie in [0,1]");
          },
      },
      rule_);
}

std::string_view DecisionRule::type_name() const {
  return std::visit(overloaded{
                        [](const Threshold&) { return std::string_view("threshold"); },
                        [](const Probit&) { return std::string_view("probit"); },
                        [](const ClampedLinear&) { return std::string_view("clamped_linear"); },
                        [](const TwoStep&) { return std::string_view("two_step"); },
                        [](const Constant&) { return std::string_view("constant"); },
                        [](const Mixture&) { return std::string_view("mixture"); },
                        [](const Tabulated&) { return std::string_view("tabulated"); },
                    },
                    rule_);
}

double evaluate_index(const DecisionRule& rule, double t) {
  return std::visit(
      overloaded{
          [&](const Threshold& r) { return t >= r.c ? 1.0 : 0.0; },
          [&](const Probit& r) { return gauss::std_normal_cdf(t / r.sigma_tilde); },
          [&](const ClampedLinear& r) { return clamp01((t + r.rho) / (2.0 * r.rho)); },
          [&](const TwoStep& r) { return t >= 0.0 ? r.hi : r.lo; },
          [&](const Constant& r) { return r.a; },
          [&](const Mixture& r) {
            double total = 0.0;
            for (std::size_t i = 0; i < r.components.size(); ++i) {
              total += r.weights[i] * evaluate_index(r.components[i], t);
            }
            return clamp01(total);
          },
          [&](const Tabulated& r) {
            const auto it = std::upper_bound(r.knots.begin(), r.knots.end(), t);
            return r.values[static_cast<std::size_t>(it - r.knots.begin())];
          },
      },
      rule.variant());
}

double evaluate(const DecisionRule& rule, const Eigen::VectorXd& y) {
  return std::visit(
      overloaded{
          [&](const Threshold& r) { return evaluate_index(rule, index_of(r.w, y)); },
          [&](const Probit& r) { return evaluate_index(rule, index_of(r.w, y)); },
          [&](const ClampedLinear& r) { return evaluate_index(rule, index_of(r.w, y)); },
          [&](const TwoStep& r) { return evaluate_index(rule, index_of(r.w, y)); },
          [&](const Constant& r) { return r.a; },
          [&](const Mixture& r) {
            double total = 0.0;
            for (std::size_t i = 0; i < r.components.size(); ++i) {
              total += r.weights[i] * evaluate(r.components[i], y);
            }
            return clamp01(total);
          },
          [&](const Tabulated& r) { return evaluate_index(rule, index_of(r.w, y)); },
      },
      rule.variant());
}

AcceptanceProbability acceptance_probability(const DecisionRule& rule, const Eigen::VectorXd& mu,
                                             const Eigen::MatrixXd& sigma) {
  using M = AcceptanceMethod;
  return std::visit(
      overloaded{
          [&](const Threshold& r) {
            const IndexLaw law = index_law(r.w, mu, sigma);
            return AcceptanceProbability{gauss::std_normal_sf((r.c - law.mean) / law.sd),
                                         M::ClosedForm};
          },
          [&](const Probit& r) {
            const IndexLaw law = index_law(r.w, mu, sigma);
            const double spread = std::hypot(r.sigma_tilde, law.sd);
            return AcceptanceProbability{gauss::std_normal_cdf(law.mean / spread), M::ClosedForm};
          },
          [&](const TwoStep& r) {
            const IndexLaw law = index_law(r.w, mu, sigma);
            const double below = gauss::std_normal_cdf(-law.mean / law.sd);
            const double above = gauss::std_normal_sf(-law.mean / law.sd);
            return AcceptanceProbability{r.lo * below + r.hi * above, M::ClosedForm};
          },
          [&](const Constant& r) { return AcceptanceProbability{r.a, M::ClosedForm}; },
          [&](const Mixture& r) {
            double total = 0.0;
            M method = M::ClosedForm;
            for (std::size_t i = 0; i < r.components.size(); ++i) {
              const auto part = acceptance_probability(r.components[i], mu, sigma);
              total += r.weights[i] * part.value;
              if (part.method == M::Quadrature) method = M::Quadrature;
            }
            return AcceptanceProbability{clamp01(total), method};
          },
          [&](const ClampedLinear& r) {
            const IndexLaw law = index_law(r.w, mu, sigma);
            const auto action = [&](double t) { return evaluate_index(rule, t); };
            return AcceptanceProbability{index_quadrature(action, law, {-r.rho, r.rho}),
                                         M::Quadrature};
          },
          [&](const Tabulated& r) {
            const IndexLaw law = index_law(r.w, mu, sigma);
            const auto action = [&](double t) { return evaluate_index(rule, t); };
            return AcceptanceProbability{index_quadrature(action, law, r.knots), M::Quadrature};
          },
      },
      rule.variant());
}

MonteCarloEstimate mc_acceptance(const DecisionRule& rule, const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& sigma, std::int64_t count,
                                 std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::Domain, "mc_acceptance: count must be at least 1");
  const Eigen::MatrixXd draws = gauss::sample_gaussian(mu, sigma, count, seed);
  // Welford: exact for constant actions, stable for long streams.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t j = 0; j < count; ++j) {
    const double x = evaluate(rule, draws.col(j));
    const double delta = x - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (x - mean);
  }
  MonteCarloEstimate out;
  out.estimate = mean;
  if (count > 1) {
    const double variance = m2 / static_cast<double>(count - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(count));
  }
  return out;
}

}  // namespace robust_treat
