#include <doctest.h>

#include <cmath>

#include "robust_treat/error.hpp"
#include "robust_treat/gauss.hpp"

using namespace robust_treat;
using namespace robust_treat::gauss;

TEST_CASE("normal cdf matches high-precision reference values") {
  CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447460685429) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(-1.0) - 0.15865525393145705) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(0.5) - 0.6914624612740131) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(2.5) - 0.99379033467422386) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(-5.0) - 2.8665157187919391e-7) <= 1e-21);
  CHECK(std::abs(std_normal_cdf(1.0 / 3.0) - 0.6305586598182364) <= 1e-15);
  CHECK(std_normal_cdf(0.0) == 0.5);
}

TEST_CASE("upper tail keeps relative precision far out") {
  CHECK(std::abs(std_normal_sf(20.0) / 2.7536241186062337e-89 - 1.0) <= 1e-13);
  CHECK(std::abs(std_normal_sf(1.0) - 0.15865525393145705) <= 1e-15);
  CHECK(std::abs(std_normal_cdf(8.0) - 0.99999999999999938) <= 1e-16);
}

TEST_CASE("normal pdf") {
  CHECK(std::abs(std_normal_pdf(0.0) - 0.3989422804014327) <= 1e-16);
  CHECK(std::abs(std_normal_pdf(1.0) - 0.24197072451914335) <= 1e-16);
}

TEST_CASE("quantile inverts the cdf") {
  CHECK(std::abs(std_normal_quantile(0.55) - 0.12566134685507403) <= 1e-13);
  CHECK(std::abs(std_normal_quantile(0.575) - 0.18911842627279238) <= 1e-13);
  CHECK(std::abs(std_normal_quantile(0.025) + 1.9599639845400542) <= 1e-12);
  CHECK(std::abs(std_normal_quantile(0.975) - 1.9599639845400539) <= 1e-12);
  CHECK(std::abs(std_normal_quantile(1e-10) + 6.3613409024040562) <= 1e-11);
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  for (double p : {1e-300, 1e-20, 0.3, 0.7, 1.0 - 1e-12}) {
    CHECK(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-12);
  }
}

TEST_CASE("quantile rejects probabilities outside (0,1)") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(std_normal_quantile(p), Error);
  }
  CHECK_THROWS_AS(std_normal_cdf(std::nan("")), Error);
}

TEST_CASE("Gauss-Legendre quadrature") {
  CHECK(std::abs(integrate([](double x) { return std_normal_cdf(x); }, 0.0, 1.0, 1) -
                 0.6843731901862536) <= 1e-14);
  CHECK(std::abs(integrate([](double x) { return std::exp(-x * x); }, 0.0, 2.0, 4) -
                 0.88208139076242168) <= 1e-14);
  // Degree 19 is integrated exactly on a single panel.
  CHECK(integrate([](double x) { return std::pow(x, 19) * 20.0; }, 0.0, 1.0, 1) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0, 3) == 0.0);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0, 1), Error);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, 0), Error);
}

TEST_CASE("Gaussian sampling is seeded and has the right moments") {
  Eigen::VectorXd mean(2);
  mean << 1.0, -2.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Eigen::MatrixXd a = sample_gaussian(mean, cov, 200000, 7);
  const Eigen::MatrixXd b = sample_gaussian(mean, cov, 200000, 7);
  CHECK(a == b);
  CHECK(a.cols() == 200000);

  const Eigen::VectorXd m = a.rowwise().mean();
  const Eigen::MatrixXd centered = a.colwise() - m;
  const Eigen::MatrixXd s = centered * centered.transpose() / (a.cols() - 1.0);
  CHECK((m - mean).cwiseAbs().maxCoeff() < 0.02);
  CHECK((s - cov).cwiseAbs().maxCoeff() < 0.03);

  CHECK(sample_gaussian(mean, cov, 10, 8) != sample_gaussian(mean, cov, 10, 9));
}

TEST_CASE("checked Cholesky rejects non-SPD input") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(checked_cholesky(asym), Error);

  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  try {
    checked_cholesky(singular);
    FAIL("singular matrix accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LinearAlgebra);
  }

  Eigen::MatrixXd good(2, 2);
  good << 4.0, 1.0, 1.0, 3.0;
  const auto llt = checked_cholesky(good);
  const Eigen::MatrixXd L = llt.matrixL();
  CHECK((L * L.transpose() - good).norm() < 1e-14);
}
