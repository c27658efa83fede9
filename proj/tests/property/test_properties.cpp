#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"
#include "robust_treat/oracle.hpp"
#include "robust_treat/solver_mmr.hpp"
#include "robust_treat/solver_per.hpp"

using namespace robust_treat;

namespace {

constexpr int kCases = 60;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::VectorXd vector(Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(sd);
    return v;
  }

  ProblemSpec external_validity() { return make_external_validity(uniform(0.1, 3.0), uniform(0.2, 5.0), uniform(0.0, 10.0)); }

  // Retries until the identified set at +-mu_bar is nonempty and the spec is not a knife edge.
  ProblemSpec evidence() {
    for (;;) {
      const int sites = integer(2, 3);
      const int dim = integer(1, 2);
      std::vector<EvidenceSite> list;
      for (int i = 0; i < sites; ++i) list.push_back({vector(dim, 0.5), uniform(0.05, 2.0)});
      try {
        return make_evidence_aggregation(vector(dim, 0.5), list, uniform(0.0, 1.5),
                                         vector(sites, 0.5));
      } catch (const Error&) {
      }
    }
  }

  DecisionRule rule(const Eigen::VectorXd& w) {
    switch (integer(0, 4)) {
      case 0:
        return Threshold{w, normal(2.0)};
      case 1:
        return Probit{w, uniform(0.05, 5.0)};
      case 2:
        return ClampedLinear{w, uniform(0.05, 5.0)};
      case 3:
        return TwoStep{w, uniform(0.0, 1.0), uniform(0.0, 1.0)};
      default:
        return Constant{uniform(0.0, 1.0)};
    }
  }

 private:
  std::mt19937_64 rng_;
};

// CaseII constants degenerate at the regime boundary and as the ratio nears
// 1/2. With Phi(-||w||) below 1e-6 the randomized ex-post rule is within
// rounding of the minimax value, so rule identity cannot be decided at 1e-9.
bool well_inside(const ProblemSpec& spec) {
  const Regime r = classify_regime(spec);
  return std::abs(r.ratio - r.phi_norm) > 1e-3 && r.ratio - 0.5 > 1e-3 &&
         1.0 - r.phi_norm > 1e-6;
}

}  // namespace

TEST_CASE("quantile and cdf are mutually inverse") {
  Gen g(1);
  for (int i = 0; i < 2000; ++i) {
    const double x = g.uniform(-37.0, 8.0);
    const double p = gauss::std_normal_cdf(x);
    if (p <= 0.0 || p >= 1.0) continue;
    CHECK(std::abs(gauss::std_normal_cdf(gauss::std_normal_quantile(p)) - p) <= 1e-12);
  }
}

TEST_CASE("returned rules attain the closed-form value") {
  Gen g(2);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = i % 2 == 0 ? g.external_validity() : g.evidence();
    if (!well_inside(spec)) continue;
    const MmrSolution sol = solve_mmr(spec);
    INFO(spec.label());
    for (const RuleCertificate& cert : sol.certificates) CHECK(cert.passed);
  }
}

TEST_CASE("no random rule beats the minimax value") {
  Gen g(3);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = i % 2 == 0 ? g.external_validity() : g.evidence();
    const double value = minimax_value(spec);
    const EfficientIndex index = efficient_index(spec);
    for (int j = 0; j < 10; ++j) {
      const Eigen::VectorXd w = j % 2 == 0 ? index.w : g.vector(spec.n());
      const DecisionRule rule = g.rule(w);
      CHECK(worst_case_bayes_regret(rule, spec).value >= value - 1e-8);
    }
  }
}

TEST_CASE("worst-case regret is the max over endpoint priors") {
  Gen g(4);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = g.external_validity();
    const DecisionRule rule = g.rule(efficient_index(spec).w);
    const AcceptancePair pair = acceptance_pair(rule, spec);
    const WorstCaseRegret worst = worst_case_bayes_regret(pair, spec);
    CHECK(bayes_regret(pair, worst.argmax, spec) == doctest::Approx(worst.value).epsilon(1e-14));
    const GammaPrior q{g.uniform(0.0, 1.0), g.uniform(0.0, 1.0)};
    CHECK(bayes_regret(pair, q, spec) <= worst.value + 1e-14);
  }
}

TEST_CASE("ex-post rule minimizes the posterior objective pointwise") {
  Gen g(5);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = i % 2 == 0 ? g.external_validity() : g.evidence();
    const PerSolution per = solve_per(spec);
    for (int j = 0; j < 20; ++j) {
      const double t = g.normal(3.0);
      const double a = per_action_at_index(per, t);
      const double v = posterior_gamma_objective_at_index(a, t, spec);
      for (int k = 0; k <= 200; ++k) {
        CHECK(v <= posterior_gamma_objective_at_index(k / 200.0, t, spec) + 1e-12);
      }
      const double binary = evaluate_index(per.nonrandomized_rule, t);
      const double vb = posterior_gamma_objective_at_index(binary, t, spec);
      CHECK(vb <= posterior_gamma_objective_at_index(1.0 - binary, t, spec) + 1e-12);
    }
  }
}

TEST_CASE("closed-form agreement matches rule identity on random specs") {
  Gen g(6);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = i % 2 == 0 ? g.external_validity() : g.evidence();
    if (!well_inside(spec)) continue;
    const AgreementReport closed = classify_agreement(spec);
    const AgreementReport identity = oracle::rule_identity_agreement(spec);
    INFO(spec.label());
    CHECK(closed.with_randomization == identity.with_randomization);
    CHECK(closed.without_randomization == identity.without_randomization);
    if (closed.with_randomization) CHECK(closed.without_randomization);
  }
}

TEST_CASE("symmetric rule families satisfy the reflection identity") {
  Gen g(7);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = g.evidence();
    const Eigen::VectorXd w = g.vector(spec.n());
    const Eigen::VectorXd mu = g.vector(spec.n(), 2.0);
    const double lo = g.uniform(0.0, 1.0);
    for (const DecisionRule& rule :
         {DecisionRule(Threshold{w, 0.0}), DecisionRule(Probit{w, g.uniform(0.1, 3.0)}),
          DecisionRule(ClampedLinear{w, g.uniform(0.1, 3.0)}), DecisionRule(TwoStep{w, lo, 1.0 - lo})}) {
      const double e = acceptance_probability(rule, mu, spec.sigma()).value;
      const double f = acceptance_probability(rule, -mu, spec.sigma()).value;
      CHECK(std::abs(e + f - 1.0) <= 1e-12);
    }
    const IdentifiedBounds b = spec.raw_bounds(mu);
    const IdentifiedBounds r = spec.raw_bounds(-mu);
    CHECK(r.lower == -b.upper);
    CHECK(r.upper == -b.lower);
  }
}

TEST_CASE("threshold acceptance is decreasing in the cutoff") {
  Gen g(8);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = g.external_validity();
    const Eigen::VectorXd w = efficient_index(spec).w;
    const double c = g.normal(2.0);
    const double a = acceptance_probability(DecisionRule(Threshold{w, c}), spec.mu_bar(), spec.sigma()).value;
    const double b =
        acceptance_probability(DecisionRule(Threshold{w, c + 0.1}), spec.mu_bar(), spec.sigma()).value;
    CHECK(a >= b);
  }
}

TEST_CASE("rho_star solves its moment equation") {
  Gen g(9);
  for (int i = 0; i < kCases; ++i) {
    const ProblemSpec spec = g.external_validity();
    if (classify_regime(spec).tag != RegimeTag::CaseII || !well_inside(spec)) continue;
    const double rho = rho_star(spec);
    const double norm = efficient_index(spec).norm;
    CHECK(std::abs(clamped_linear_acceptance_at_mu_bar(rho, norm) - classify_regime(spec).ratio) <=
          1e-10);
  }
}

TEST_CASE("oracle minimax never undercuts the closed form") {
  Gen g(10);
  for (int i = 0; i < 12; ++i) {
    const ProblemSpec spec = i % 2 == 0 ? g.external_validity() : g.evidence();
    const oracle::MinimaxSearch s = oracle::brute_force_minimax(spec, oracle::make_minimax_grid(spec, 200));
    const double value = minimax_value(spec);
    CHECK(s.value >= value - 1e-10);
    CHECK(s.value <= value + 5e-3);
  }
}
