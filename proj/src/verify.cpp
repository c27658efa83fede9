#include "robust_treat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "robust_treat/gauss.hpp"
#include "robust_treat/oracle.hpp"
#include "robust_treat/solver_per.hpp"

namespace robust_treat {
namespace {

class Collector {
 public:
  explicit Collector(VerifyReport& report) : report_(report) {}

  // Passes when |residual| <= tol.
  void within(std::string name, double residual, double tol) {
    report_.checks.push_back({std::move(name), tol, residual, std::abs(residual) <= tol});
  }

  // Passes when residual > tol.
  void above(std::string name, double residual, double tol) {
    report_.checks.push_back({std::move(name), tol, residual, residual > tol});
  }

  void flag(std::string name, bool ok) {
    report_.checks.push_back({std::move(name), 0.0, ok ? 0.0 : 1.0, ok});
  }

 private:
  VerifyReport& report_;
};

bool is_symmetric_family(const DecisionRule& rule) {
  if (const auto* t = rule.get_if<Threshold>()) return t->c == 0.0;
  if (const auto* s = rule.get_if<TwoStep>()) return s->lo + s->hi == 1.0;
  return rule.get_if<Probit>() != nullptr || rule.get_if<ClampedLinear>() != nullptr;
}

void certificate_checks(Collector& out, const MmrSolution& sol) {
  for (const RuleCertificate& cert : sol.certificates) {
    const bool optimal = std::any_of(sol.rules.begin(), sol.rules.end(), [&](const auto& r) {
      return r.label == cert.label && r.optimal;
    });
    if (optimal) {
      out.flag("certificate:" + cert.label, cert.passed);
    } else {
      out.above("suboptimal_gap:" + cert.label, cert.value_residual, 0.0);
    }
  }
}

void moment_checks(Collector& out, const ProblemSpec& spec, const MmrSolution& sol,
                   const VerifyOptions& opt) {
  std::vector<DecisionRule> optimal;
  std::vector<std::string> labels;
  for (const LabeledRule& r : sol.rules) {
    if (!r.optimal) continue;
    optimal.push_back(r.rule);
    labels.push_back(r.label);
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mixture mixture;
  double total = 0.0;
  for (const DecisionRule& r : optimal) {
    mixture.components.push_back(r);
    mixture.weights.push_back(0.1 + unit(rng));
    total += mixture.weights.back();
  }
  for (double& weight : mixture.weights) weight /= total;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < mixture.weights.size(); ++i) sum += mixture.weights[i];
  mixture.weights.back() = 1.0 - sum;
  optimal.emplace_back(std::move(mixture));
  labels.emplace_back("mixture");

  for (std::size_t i = 0; i < optimal.size(); ++i) {
    const DecisionRule& rule = optimal[i];
    const MomentCertificate m = verify_moment_conditions(rule, spec, 0.0, labels[i]);
    const double tol =
        m.method == AcceptanceMethod::Quadrature ? opt.quadrature_tol : opt.closed_form_tol;
    out.within("moment_minus:" + labels[i], m.residual_minus, tol);
    out.within("moment_plus:" + labels[i], m.residual_plus, tol);
    if (opt.mc_draws > 0) {
      const std::uint64_t seed = opt.seed + 2 * i + 1;
      const MonteCarloEstimate plus =
          mc_acceptance(rule, spec.mu_bar(), spec.sigma(), opt.mc_draws, seed);
      const MonteCarloEstimate minus =
          mc_acceptance(rule, -spec.mu_bar(), spec.sigma(), opt.mc_draws, seed + 1);
      out.within("mc_moment_plus:" + labels[i], plus.estimate - m.target_plus,
                 opt.mc_sigmas * std::max(plus.std_error, 1e-12));
      out.within("mc_moment_minus:" + labels[i], minus.estimate - m.target_minus,
                 opt.mc_sigmas * std::max(minus.std_error, 1e-12));
    }
  }
}

void threshold_checks(Collector& out, const ProblemSpec& spec, const MmrSolution& sol,
                      const VerifyOptions& opt) {
  const double norm = sol.index.norm;
  const double reach = norm * norm + gauss::kTailClip * norm;
  const std::vector<double> grid = oracle::linspace(-reach, reach, opt.threshold_grid);
  const double step = grid[1] - grid[0];
  double best_c = grid.front();
  double best = threshold_worst_case_regret(spec, best_c);
  for (double c : grid) {
    const double v = threshold_worst_case_regret(spec, c);
    if (v < best) {
      best = v;
      best_c = c;
    }
  }
  const double c_star = sol.constants->c_star;
  out.within("threshold_argmin_at_c_star", std::abs(std::abs(best_c) - c_star), step);
  out.above("threshold_gap_positive", best - sol.value, 0.0);
}

void per_checks(Collector& out, const ProblemSpec& spec, const VerifyOptions& opt) {
  const PerSolution per = solve_per(spec);
  const EfficientIndex index = efficient_index(spec);
  const double sd = index.norm;
  const std::vector<double> probes =
      oracle::linspace(-4.0 * sd - 1.0, 4.0 * sd + 1.0, opt.per_probes);
  double worst_excess = 0.0;
  double worst_binary_excess = 0.0;
  int uniqueness_failures = 0;
  const double grid_step = 1.0 / static_cast<double>(opt.per_grid - 1);
  for (double t : probes) {
    const double action = per_action_at_index(per, t);
    const double v_solver = posterior_gamma_objective_at_index(action, t, spec);
    const double a_grid = oracle::brute_force_per_at_index(spec, t, opt.per_grid);
    const double v_grid = posterior_gamma_objective_at_index(a_grid, t, spec);
    worst_excess = std::max(worst_excess, v_solver - v_grid);
    if (per.ambiguous_sign && t != 0.0) {
      // The grid argmin must bracket the solver's action and beat both grid neighbours.
      bool unique = std::abs(a_grid - action) < grid_step;
      for (double neighbour : {a_grid - grid_step, a_grid + grid_step}) {
        if (neighbour < 0.0 || neighbour > 1.0) continue;
        if (!(posterior_gamma_objective_at_index(neighbour, t, spec) > v_grid)) unique = false;
      }
      if (!unique) ++uniqueness_failures;
    }
    const double binary = evaluate_index(per.nonrandomized_rule, t);
    const double v_binary = posterior_gamma_objective_at_index(binary, t, spec);
    const double v_best_binary = std::min(posterior_gamma_objective_at_index(0.0, t, spec),
                                          posterior_gamma_objective_at_index(1.0, t, spec));
    worst_binary_excess = std::max(worst_binary_excess, v_binary - v_best_binary);
  }
  out.within("per_pointwise_optimal", std::max(0.0, worst_excess), 1e-10);
  out.within("per_unique_grid_minimizer", uniqueness_failures, 0.0);
  out.within("per_nonrandomized_optimal", std::max(0.0, worst_binary_excess), 1e-12);
}

void symmetry_checks(Collector& out, const ProblemSpec& spec, const MmrSolution& sol,
                     const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed ^ 0x5eedULL);
  std::normal_distribution<double> normal(0.0, 3.0);
  double worst_bounds = 0.0;
  double worst_accept = 0.0;
  for (int i = 0; i < opt.symmetry_draws; ++i) {
    Eigen::VectorXd mu(spec.n());
    for (Eigen::Index j = 0; j < mu.size(); ++j) mu(j) = normal(rng);
    const IdentifiedBounds b = spec.raw_bounds(mu);
    const IdentifiedBounds r = spec.raw_bounds(-mu);
    worst_bounds = std::max({worst_bounds, std::abs(r.lower + b.upper), std::abs(r.upper + b.lower)});
    for (const LabeledRule& entry : sol.rules) {
      if (!is_symmetric_family(entry.rule)) continue;
      const double e = acceptance_probability(entry.rule, mu, spec.sigma()).value;
      const double f = acceptance_probability(entry.rule, -mu, spec.sigma()).value;
      worst_accept = std::max(worst_accept, std::abs(e + f - 1.0));
    }
  }
  out.within("bound_reflection", worst_bounds, 0.0);
  out.within("acceptance_symmetry", worst_accept, 1e-12);
}

}  // namespace

VerifyReport run_verification(const ProblemSpec& spec, const VerifyOptions& opt) {
  VerifyReport report;
  report.label = spec.label();
  Collector out(report);

  const MmrSolution sol = solve_mmr(spec, opt.overrides);
  certificate_checks(out, sol);
  if (sol.regime.tag == RegimeTag::CaseII) {
    moment_checks(out, spec, sol, opt);
    threshold_checks(out, spec, sol, opt);
  }

  const oracle::MinimaxReport mm =
      oracle::minimax_report(spec, oracle::make_minimax_grid(spec, opt.knots, opt.action_levels));
  out.within("oracle_minimax_gap", mm.gap, opt.oracle_tol);
  out.flag("oracle_monotone_refinement", mm.monotone);
  out.flag("oracle_grid_cauchy", !mm.too_coarse);

  per_checks(out, spec, opt);

  const AgreementReport closed = classify_agreement(spec);
  const AgreementReport identity = oracle::rule_identity_agreement(spec);
  out.flag("agreement_with_randomization",
           closed.with_randomization == identity.with_randomization);
  out.flag("agreement_without_randomization",
           closed.without_randomization == identity.without_randomization);

  symmetry_checks(out, spec, sol, opt);

  const oracle::AuditReport audit = oracle::equilibrium_audit(sol, spec);
  for (const oracle::AuditCheck& c : audit.checks) out.within("audit:" + c.name, c.residual, c.tol);

  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const CheckResult& c) { return c.passed; });
  return report;
}

Json to_json(const VerifyReport& report) {
  Json checks = Json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"tol", c.tol}, {"residual", c.residual}, {"passed", c.passed}});
  }
  return {{"label", report.label}, {"checks", checks}, {"passed", report.passed}};
}

}  // namespace robust_treat
