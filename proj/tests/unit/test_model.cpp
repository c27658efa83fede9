#include <doctest.h>

#include <cmath>

#include "robust_treat/error.hpp"
#include "robust_treat/model.hpp"

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

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ProblemSpec evidence(double variance) {
  std::vector<EvidenceSite> sites{{vec({-0.5}), variance}, {vec({0.5}), variance}};
  return make_evidence_aggregation(vec({0.0}), sites, 1.0, vec({0.3, -0.1}));
}

}  // namespace

TEST_CASE("external-validity bounds and regime") {
  const ProblemSpec s = make_external_validity(1.0, 1.0, 10.0);
  const IdentifiedBounds b = bounds_at(s, s.mu_bar());
  CHECK(b.lower == -9.0);
  CHECK(b.upper == 11.0);
  const Regime r = classify_regime(s);
  CHECK(r.tag == RegimeTag::CaseII);
  CHECK(r.ratio == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(std::abs(r.phi_norm - 0.8413447460685429) <= 1e-15);

  CHECK(classify_regime(make_external_validity(1.0, 1.0, 0.5)).tag == RegimeTag::CaseI);
  CHECK(classify_regime(make_external_validity(1.0, 3.0, 2.0)).tag == RegimeTag::CaseI);
  CHECK(classify_regime(make_external_validity(1.0, 1.0, 2.0)).tag == RegimeTag::CaseII);
}

TEST_CASE("point identification has ratio one") {
  const Regime r = classify_regime(make_external_validity(2.0, 1.0, 0.0));
  CHECK(r.ratio == 1.0);
  CHECK(r.tag == RegimeTag::CaseI);
}

TEST_CASE("negative mu_bar is flipped by normalization") {
  const ProblemSpec s = make_external_validity(-1.0, 1.0, 3.0);
  CHECK(s.flipped());
  CHECK(s.mu_bar()(0) == 1.0);
  CHECK(is_normalized(s));
  const ProblemSpec raw = s.with_flipped_mu_bar();
  CHECK_FALSE(is_normalized(raw));
  CHECK(kind_of([&] { require_normalized(raw, "test"); }) == ErrorKind::Precondition);
}

TEST_CASE("external-validity constructor errors") {
  CHECK(kind_of([] { make_external_validity(0.0, 1.0, 1.0); }) == ErrorKind::DegenerateSpec);
  CHECK(kind_of([] { make_external_validity(1.0, 0.0, 1.0); }) == ErrorKind::Domain);
  CHECK(kind_of([] { make_external_validity(1.0, 1.0, -1.0); }) == ErrorKind::Domain);
}

TEST_CASE("efficient index") {
  const EfficientIndex s = efficient_index(make_external_validity(1.0, 2.0, 1.0));
  CHECK(s.w(0) == doctest::Approx(0.25));
  CHECK(s.norm == doctest::Approx(0.5));

  const EfficientIndex e = efficient_index(evidence(0.1));
  CHECK(e.w(0) == doctest::Approx(3.0));
  CHECK(e.w(1) == doctest::Approx(-1.0));
  CHECK(e.norm == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("evidence aggregation bounds and regimes") {
  const ProblemSpec weak = evidence(0.1);
  const IdentifiedBounds b = bounds_at(weak, weak.mu_bar());
  CHECK(b.lower == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(b.upper == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(classify_regime(weak).tag == RegimeTag::CaseII);
  CHECK(classify_regime(evidence(1.0)).tag == RegimeTag::CaseI);

  CHECK(kind_of([] {
          std::vector<EvidenceSite> none;
          make_evidence_aggregation(vec({0.0}), none, 1.0, vec({}));
        }) == ErrorKind::DegenerateSpec);
}

TEST_CASE("evidence aggregation detects an empty identified set") {
  std::vector<EvidenceSite> sites{{vec({-0.1}), 1.0}, {vec({0.1}), 1.0}};
  CHECK(kind_of([&] { make_evidence_aggregation(vec({0.0}), sites, 1.0, vec({2.0, -2.0})); }) ==
        ErrorKind::InfeasibleSpec);
}

TEST_CASE("knife-edge specs cannot be normalized") {
  BoundsFn symmetric = [](const Eigen::VectorXd&) { return IdentifiedBounds{-1.0, 1.0}; };
  ProblemSpec spec(Eigen::MatrixXd::Identity(1, 1), vec({1.0}), symmetric, "knife");
  CHECK(kind_of([&] { normalize(spec); }) == ErrorKind::KnifeEdge);
}

TEST_CASE("covariance must be SPD and dimensions must agree") {
  BoundsFn b = [](const Eigen::VectorXd& m) { return IdentifiedBounds{m(0) - 1, m(0) + 1}; };
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK(kind_of([&] { ProblemSpec(bad, vec({1.0, 0.0}), b, "bad"); }) ==
        ErrorKind::LinearAlgebra);
  CHECK(kind_of([&] { ProblemSpec(Eigen::MatrixXd::Identity(2, 2), vec({1.0}), b, "dim"); }) ==
        ErrorKind::Dimension);
  CHECK(kind_of([&] { ProblemSpec(Eigen::MatrixXd::Identity(1, 1), vec({0.0}), b, "zero"); }) ==
        ErrorKind::DegenerateSpec);
}

TEST_CASE("spd_solve") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2.0, 0.5, 0.5, 1.0;
  const Eigen::VectorXd x = spd_solve(sigma, vec({1.0, 1.0}));
  CHECK((sigma * x - vec({1.0, 1.0})).norm() < 1e-14);
}

TEST_CASE("regime tag names") {
  CHECK(to_string(RegimeTag::CaseI) == "CaseI");
  CHECK(to_string(RegimeTag::CaseII) == "CaseII");
}
