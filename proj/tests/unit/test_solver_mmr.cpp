#include <doctest.h>

#include <cmath>

#include "robust_treat/error.hpp"
#include "robust_treat/solver_mmr.hpp"

using namespace robust_treat;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Numeric;
}

ProblemSpec plane_scalar(double k) {
  BoundsFn b = [k](const Eigen::VectorXd& m) { return IdentifiedBounds{m(0) - k, m(0) + k}; };
  Eigen::VectorXd mu(2);
  mu << 1.0, 0.0;
  return normalize(ProblemSpec(Eigen::MatrixXd::Identity(2, 2), mu, b, "plane"));
}

const LabeledRule* find(const MmrSolution& s, const std::string& label) {
  for (const auto& r : s.rules) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("CaseI solution") {
  const MmrSolution s = solve_mmr(make_external_validity(1.0, 1.0, 0.5));
  CHECK(s.regime.tag == RegimeTag::CaseI);
  CHECK(std::abs(s.value - 0.23798288089718558) <= 1e-15);
  REQUIRE(s.rules.size() == 1);
  CHECK(s.rules[0].label == "d_w0");
  CHECK_FALSE(s.constants.has_value());
  CHECK_FALSE(s.lfp.four_point);
  CHECK(s.lfp.prior.q_plus == 1.0);
  CHECK(s.lfp.prior.q_minus == 0.0);
  CHECK(s.certificates[0].passed);
}

TEST_CASE("CaseII constants for external_validity(1, 1, 10)") {
  const ProblemSpec spec = make_external_validity(1.0, 1.0, 10.0);
  CHECK(std::abs(sigma_tilde(spec) - 7.894815873534781) <= 1e-11);
  CHECK(std::abs(beta_star(spec) - 0.0732397386745772) <= 1e-13);
  CHECK(std::abs(c_star(spec) - 0.874338653144926) <= 1e-13);
  CHECK(std::abs(rho_star(spec) - 10.0) <= 1e-9);
  CHECK(minimax_value(spec) == doctest::Approx(4.95).epsilon(1e-15));
}

TEST_CASE("CaseII constants for external_validity(0.3, 1, 2)") {
  const ProblemSpec spec = make_external_validity(0.3, 1.0, 2.0);
  CHECK(std::abs(sigma_tilde(spec) - 0.36942315418666994) <= 1e-12);
  CHECK(std::abs(beta_star(spec) - 0.31803534639677556) <= 1e-13);
  CHECK(std::abs(c_star(spec) - 0.033264472118162253) <= 1e-13);
  CHECK(std::abs(rho_star(spec) - 0.5606733555428638) <= 1e-10);
  CHECK(minimax_value(spec) == doctest::Approx(0.9775).epsilon(1e-15));
}

TEST_CASE("clamped-linear mean is decreasing in rho") {
  double prev = 1.0;
  for (double rho = 0.5; rho < 40.0; rho *= 1.5) {
    const double v = clamped_linear_acceptance_at_mu_bar(rho, 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(clamped_linear_acceptance_at_mu_bar(1e-8, 1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-7));
}

TEST_CASE("CaseII rules and certificates") {
  const MmrSolution s = solve_mmr(make_external_validity(1.0, 1.0, 10.0));
  CHECK(s.regime.tag == RegimeTag::CaseII);
  for (const char* label : {"d_rt", "d_linear", "d_step"}) {
    const LabeledRule* r = find(s, label);
    REQUIRE(r != nullptr);
    CHECK(r->optimal);
  }
  const auto* step = find(s, "d_step")->rule.get_if<TwoStep>();
  CHECK(std::abs(step->lo - 0.426760261325423) <= 1e-13);
  CHECK(std::abs(step->hi - 0.573239738674577) <= 1e-13);
  CHECK_FALSE(find(s, "threshold_plus_c")->optimal);
  CHECK(find(s, "d_wt_plus") == nullptr);
  for (const auto& cert : s.certificates) CHECK(cert.passed);
  CHECK(s.lfp.four_point);
  CHECK(s.lfp.prior.q_plus == doctest::Approx(0.45));
  CHECK(s.lfp.prior.q_minus == doctest::Approx(0.55));
  double mass = 0.0;
  for (const auto& p : s.lfp.support) mass += p.mass;
  CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("suboptimal thresholds exceed the value") {
  const ProblemSpec spec = make_external_validity(1.0, 1.0, 10.0);
  const double c = c_star(spec);
  CHECK(threshold_worst_case_regret(spec, c) > 4.95 + 1.0);
  CHECK(threshold_worst_case_regret(spec, c) ==
        doctest::Approx(threshold_worst_case_regret(spec, -c)));
  CHECK(threshold_worst_case_regret(spec, c) < threshold_worst_case_regret(spec, c + 0.05));
  CHECK(threshold_worst_case_regret(spec, c) < threshold_worst_case_regret(spec, c - 0.05));
}

TEST_CASE("purified threshold rules in two dimensions") {
  const ProblemSpec spec = plane_scalar(10.0);
  const TStarResult t = t_star(spec);
  CHECK(std::abs(t.s_star - 0.015790774093431225) <= 1e-14);
  REQUIRE(t.roots.size() == 2);
  CHECK(std::abs(t.roots[0].t - 0.11242503658511395) <= 1e-12);
  CHECK(std::abs(t.roots[1].t + 0.14503650544729163) <= 1e-12);
  for (const TStarRoot& root : t.roots) {
    const MomentCertificate m = verify_moment_conditions(root.rule, spec, 1e-10);
    CHECK(m.passed);
  }
  const MmrSolution s = solve_mmr(spec);
  CHECK(find(s, "d_wt_plus") != nullptr);
  CHECK(find(s, "d_wt_minus") != nullptr);
}

TEST_CASE("t_star preconditions") {
  CHECK(kind_of([] { t_star(make_external_validity(1.0, 1.0, 10.0)); }) == ErrorKind::Dimension);
  Eigen::VectorXd not_orthogonal(2);
  not_orthogonal << 1.0, 1.0;
  CHECK(kind_of([] { t_star(plane_scalar(10.0), Eigen::VectorXd::Zero(2)); }) ==
        ErrorKind::Precondition);
  CHECK(kind_of([&] { t_star(plane_scalar(10.0), not_orthogonal); }) == ErrorKind::Precondition);
  CHECK(kind_of([] { t_star(plane_scalar(0.5)); }) == ErrorKind::Regime);
}

TEST_CASE("CaseII constants are unavailable in CaseI") {
  const ProblemSpec spec = make_external_validity(1.0, 1.0, 0.5);
  CHECK(kind_of([&] { sigma_tilde(spec); }) == ErrorKind::Regime);
  CHECK(kind_of([&] { rho_star(spec); }) == ErrorKind::Regime);
  CHECK(kind_of([&] { beta_star(spec); }) == ErrorKind::Regime);
  CHECK(kind_of([&] { c_star(spec); }) == ErrorKind::Regime);
}

TEST_CASE("overrides break the moment certificates") {
  const ProblemSpec spec = make_external_validity(1.0, 1.0, 10.0);
  const MmrSolution s = solve_mmr(spec, MmrOverrides{1e-3, 0.0, 0.0});
  for (const auto& cert : s.certificates) {
    if (cert.label == "d_rt") CHECK_FALSE(cert.passed);
    if (cert.label == "d_step") CHECK(cert.passed);
  }
}

TEST_CASE("plain threshold fails the moment conditions in CaseII") {
  const ProblemSpec spec = make_external_validity(1.0, 1.0, 10.0);
  const MomentCertificate m =
      verify_moment_conditions(DecisionRule(Threshold{spec.mu_bar(), 0.0}), spec, 1e-8);
  CHECK_FALSE(m.passed);
  CHECK(m.residual_plus == doctest::Approx(0.8413447460685429 - 0.55).epsilon(1e-12));
}
