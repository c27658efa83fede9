#include "robust_treat/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"

namespace robust_treat::oracle {
namespace {

struct Cells {
  std::vector<double> plus;
  std::vector<double> minus;
};

std::vector<double> cell_masses(const std::vector<double>& knots, double mean, double sd) {
  std::vector<double> mass(knots.size() + 1);
  double prev_cdf = 0.0;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    const double cdf = gauss::std_normal_cdf((knots[j] - mean) / sd);
    mass[j] = std::max(0.0, cdf - prev_cdf);
    prev_cdf = cdf;
  }
  mass.back() = knots.empty() ? 1.0 : gauss::std_normal_sf((knots.back() - mean) / sd);
  return mass;
}

struct Fill {
  std::vector<double> values;
  double e_plus = 0.0;
  double e_minus = 0.0;
};

// Likelihood-ratio test reaching E_{-mu_bar} = target: cells are filled from
// the top (most powerful) or the bottom (least powerful), with a fractional
// boundary cell.
Fill frontier_rule(const Cells& cells, double target, bool from_top) {
  const std::size_t m = cells.plus.size();
  Fill fill;
  fill.values.assign(m, 0.0);
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t j = from_top ? m - 1 - step : step;
    const double room = target - fill.e_minus;
    if (cells.minus[j] <= room) {
      fill.values[j] = 1.0;
      fill.e_minus += cells.minus[j];
      fill.e_plus += cells.plus[j];
      continue;
    }
    const double level = std::clamp(room / cells.minus[j], 0.0, 1.0);
    fill.values[j] = level;
    fill.e_minus += level * cells.minus[j];
    fill.e_plus += level * cells.plus[j];
    break;
  }
  fill.e_plus = std::clamp(fill.e_plus, 0.0, 1.0);
  return fill;
}

class GridObjective {
 public:
  GridObjective(const ProblemSpec& spec, const std::vector<GammaPrior>& priors)
      : plus_(bounds_at(spec, spec.mu_bar())), minus_(bounds_at(spec, -spec.mu_bar())),
        priors_(priors) {}

  double operator()(double e_plus, double e_minus) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const GammaPrior& q : priors_) {
      const double at_plus = q.q_plus * regret_of_action(plus_.upper, e_plus) +
                             (1.0 - q.q_plus) * regret_of_action(plus_.lower, e_plus);
      const double at_minus = q.q_minus * regret_of_action(minus_.upper, e_minus) +
                              (1.0 - q.q_minus) * regret_of_action(minus_.lower, e_minus);
      best = std::max(best, 0.5 * at_plus + 0.5 * at_minus);
    }
    return best;
  }

 private:
  IdentifiedBounds plus_;
  IdentifiedBounds minus_;
  std::vector<GammaPrior> priors_;
};

template <class F>
double ternary_argmin(F&& f, double lo, double hi, int iterations = 100) {
  for (int i = 0; i < iterations && hi - lo > 1e-15; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> linspace(double lo, double hi, std::int64_t count) {
  if (count < 1) throw Error(ErrorKind::Domain, "linspace: count must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

MinimaxGrid make_minimax_grid(const ProblemSpec& spec, int knot_count, int action_count,
                              int prior_side) {
  if (knot_count < 1 || action_count < 2 || prior_side < 2) {
    throw Error(ErrorKind::Domain, "make_minimax_grid: grid sizes are too small");
  }
  const EfficientIndex index = efficient_index(spec);
  const double reach = index.norm * index.norm + gauss::kTailClip * index.norm;
  MinimaxGrid grid;
  grid.index_knots = linspace(-reach, reach, knot_count);
  grid.action_levels = linspace(0.0, 1.0, action_count);
  for (double qp : linspace(0.0, 1.0, prior_side)) {
    for (double qm : linspace(0.0, 1.0, prior_side)) grid.prior_grid.push_back({qp, qm});
  }
  return grid;
}

MinimaxGrid refine(const MinimaxGrid& grid) {
  MinimaxGrid out = grid;
  out.index_knots.clear();
  for (std::size_t i = 0; i < grid.index_knots.size(); ++i) {
    if (i > 0) out.index_knots.push_back(0.5 * (grid.index_knots[i - 1] + grid.index_knots[i]));
    out.index_knots.push_back(grid.index_knots[i]);
  }
  return out;
}

MinimaxSearch brute_force_minimax(const ProblemSpec& spec, const MinimaxGrid& grid) {
  require_normalized(spec, "brute_force_minimax");
  if (grid.index_knots.empty() || grid.action_levels.empty() || grid.prior_grid.empty()) {
    throw Error(ErrorKind::Domain, "brute_force_minimax: grids must be nonempty");
  }
  const EfficientIndex index = efficient_index(spec);
  const double mean = index.norm * index.norm;
  const Cells cells{cell_masses(grid.index_knots, mean, index.norm),
                    cell_masses(grid.index_knots, -mean, index.norm)};
  const GridObjective objective(spec, grid.prior_grid);

  // Convex region between the two frontiers; the objective is convex in
  // (E+, E-), so nested ternary searches find its minimum.
  const auto inner = [&](double e_minus, double* e_plus_out) {
    const double hi = frontier_rule(cells, e_minus, true).e_plus;
    const double lo = std::min(hi, frontier_rule(cells, e_minus, false).e_plus);
    const double e_plus = ternary_argmin([&](double ep) { return objective(ep, e_minus); }, lo, hi);
    if (e_plus_out) *e_plus_out = e_plus;
    return objective(e_plus, e_minus);
  };
  const double e_minus = ternary_argmin([&](double em) { return inner(em, nullptr); }, 0.0, 1.0);
  double e_plus = 0.0;
  MinimaxSearch result;
  result.value = inner(e_minus, &e_plus);

  const Fill upper = frontier_rule(cells, e_minus, true);
  const Fill lower = frontier_rule(cells, e_minus, false);
  const double span = upper.e_plus - lower.e_plus;
  const double lambda = span > 0.0 ? std::clamp((e_plus - lower.e_plus) / span, 0.0, 1.0) : 1.0;
  std::vector<double> values(upper.values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = std::clamp(lambda * upper.values[j] + (1.0 - lambda) * lower.values[j], 0.0, 1.0);
  }
  result.rule = DecisionRule(Tabulated{index.w, grid.index_knots, std::move(values)});
  result.acceptance = {e_plus, e_minus};

  // Finite family: threshold cells filled completely, boundary cell at a grid level.
  double discrete = std::numeric_limits<double>::infinity();
  const std::size_t m = cells.plus.size();
  for (bool from_top : {true, false}) {
    double full_plus = 0.0;
    double full_minus = 0.0;
    for (std::size_t step = 0; step < m; ++step) {
      const std::size_t j = from_top ? m - 1 - step : step;
      for (double level : grid.action_levels) {
        discrete = std::min(discrete, objective(std::min(1.0, full_plus + level * cells.plus[j]),
                                                std::min(1.0, full_minus + level * cells.minus[j])));
      }
      full_plus += cells.plus[j];
      full_minus += cells.minus[j];
    }
  }
  for (double level : grid.action_levels) discrete = std::min(discrete, objective(level, level));
  result.discrete_value = discrete;
  return result;
}

MinimaxReport minimax_report(const ProblemSpec& spec, const MinimaxGrid& grid,
                             double cauchy_tol) {
  MinimaxReport report;
  report.coarse = brute_force_minimax(spec, grid);
  report.refined = brute_force_minimax(spec, refine(grid));
  report.closed_form = minimax_value(spec);
  report.gap = report.coarse.value - report.closed_form;
  report.refined_gap = report.refined.value - report.closed_form;
  report.refinement_step = report.coarse.value - report.refined.value;
  report.monotone = report.refined.value <= report.coarse.value + 1e-12;
  report.too_coarse = std::abs(report.refinement_step) > cauchy_tol;
  return report;
}

double brute_force_per_at_index(const ProblemSpec& spec, double index,
                                std::int64_t action_grid_size) {
  require_normalized(spec, "brute_force_per");
  if (action_grid_size < 2) {
    throw Error(ErrorKind::Domain, "brute_force_per: need at least two actions");
  }
  double best_action = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(action_grid_size - 1);
  for (std::int64_t i = 0; i < action_grid_size; ++i) {
    const double a = static_cast<double>(i) / denom;
    const double v = posterior_gamma_objective_at_index(a, index, spec);
    if (v < best_value) {
      best_value = v;
      best_action = a;
    }
  }
  return best_action;
}

double brute_force_per(const ProblemSpec& spec, const Eigen::VectorXd& y,
                       std::int64_t action_grid_size) {
  const EfficientIndex index = efficient_index(spec);
  if (y.size() != index.w.size()) {
    throw Error(ErrorKind::Dimension, "brute_force_per: data has the wrong dimension");
  }
  return brute_force_per_at_index(spec, index.w.dot(y), action_grid_size);
}

DominanceReport dominance_scan(const DecisionRule& rule_a, const DecisionRule& rule_b,
                               const ProblemSpec& scalar_spec, const std::vector<double>& mu_grid,
                               double tie_tol) {
  DominanceReport report;
  report.tie_tol = tie_tol;
  report.mu = mu_grid;
  report.a_weakly_above = true;
  report.a_strictly_above_off_zero = true;
  report.all_equal = true;
  report.min_gap_off_zero = std::numeric_limits<double>::infinity();
  for (double mu : mu_grid) {
    const double a = profiled_regret(rule_a, mu, scalar_spec);
    const double b = profiled_regret(rule_b, mu, scalar_spec);
    report.value_a.push_back(a);
    report.value_b.push_back(b);
    if (a < b - tie_tol) report.a_weakly_above = false;
    if (std::abs(a - b) > tie_tol) report.all_equal = false;
    if (mu != 0.0) {
      if (!(a - b > tie_tol)) report.a_strictly_above_off_zero = false;
      report.min_gap_off_zero = std::min(report.min_gap_off_zero, a - b);
    }
  }
  return report;
}

AuditReport equilibrium_audit(const MmrSolution& solution, const ProblemSpec& spec,
                              int probe_count, std::uint64_t seed) {
  AuditReport report;
  const auto add = [&](std::string name, double residual, double tol) {
    report.checks.push_back({std::move(name), residual, tol, std::abs(residual) <= tol});
  };

  for (const LabeledRule& entry : solution.rules) {
    if (!entry.optimal) continue;
    const bool quadrature = entry.rule.get_if<ClampedLinear>() != nullptr;
    const double tol = quadrature ? kQuadratureTol : 1e-9;
    const double worst = worst_case_bayes_regret(entry.rule, spec).value;
    add("worst_case_equals_value:" + entry.label, worst - solution.value, tol);
  }

  const DecisionRule& d_star = solution.rules.front().rule;
  const AcceptancePair pair = acceptance_pair(d_star, spec);
  const double at_lfp = bayes_regret(pair, solution.lfp.prior, spec);
  double grid_max = -std::numeric_limits<double>::infinity();
  for (double qp : linspace(0.0, 1.0, 21)) {
    for (double qm : linspace(0.0, 1.0, 21)) {
      grid_max = std::max(grid_max, bayes_regret(pair, GammaPrior{qp, qm}, spec));
    }
  }
  add("lfp_maximizes_bayes_regret", std::max(0.0, grid_max - at_lfp), 1e-9);
  add("lfp_value_matches", at_lfp - solution.value, 1e-9);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd& w = solution.index.w;
  const double scale = solution.index.norm * solution.index.norm + solution.index.norm;
  std::vector<DecisionRule> probes;
  for (int i = 0; i < probe_count; ++i) {
    Eigen::VectorXd direction = w;
    if (spec.n() > 1 && i % 2 == 1) {
      for (Eigen::Index j = 0; j < direction.size(); ++j) direction(j) = normal(rng);
    }
    switch (i % 4) {
      case 0:
        probes.emplace_back(Threshold{direction, scale * (2.0 * unit(rng) - 1.0)});
        break;
      case 1:
        probes.emplace_back(Probit{direction, 0.1 + 5.0 * unit(rng)});
        break;
      case 2:
        probes.emplace_back(TwoStep{direction, unit(rng), unit(rng)});
        break;
      default:
        probes.emplace_back(Constant{unit(rng)});
        break;
    }
  }

  if (solution.regime.tag == RegimeTag::CaseII) {
    double spread = 0.0;
    for (const DecisionRule& probe : probes) {
      spread = std::max(spread, std::abs(bayes_regret(probe, solution.lfp.prior, spec) -
                                         solution.value));
    }
    add("lfp_uninformative", spread, 1e-10);
  } else {
    double shortfall = 0.0;
    for (const DecisionRule& probe : probes) {
      shortfall = std::max(shortfall, at_lfp - bayes_regret(probe, solution.lfp.prior, spec));
    }
    add("rule_best_responds_to_lfp", shortfall, 1e-12);
  }

  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const AuditCheck& c) { return c.passed; });
  return report;
}

AgreementReport rule_identity_agreement(const ProblemSpec& spec, double tol) {
  const double value = minimax_value(spec);
  const PerSolution per = solve_per(spec);
  const double slack = tol * std::max(1.0, std::abs(value));
  AgreementReport report;
  report.with_randomization =
      worst_case_bayes_regret(per.randomized_rule, spec).value <= value + slack;
  report.without_randomization =
      worst_case_bayes_regret(per.nonrandomized_rule, spec).value <= value + slack;
  return report;
}

}  // namespace robust_treat::oracle
