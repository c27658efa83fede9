#include "robust_treat/gauss.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "robust_treat/error.hpp"

namespace robust_treat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::DegenerateSpec: return "degenerate spec";
    case ErrorKind::InfeasibleSpec: return "infeasible spec";
    case ErrorKind::KnifeEdge: return "knife-edge spec";
    case ErrorKind::LinearAlgebra: return "linear algebra error";
    case ErrorKind::DegenerateIndex: return "degenerate index";
    case ErrorKind::Regime: return "regime error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::Numeric: return "numeric error";
  }
  return "unknown error";
}

}  // namespace robust_treat

namespace robust_treat::gauss {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::Domain, std::string(what) + ": non-finite argument");
  }
}

struct GaussLegendre10 {
  std::array<double, 10> nodes{};
  std::array<double, 10> weights{};
};

// Roots of P_10 by Newton iteration from the Chebyshev-like initial guesses.
GaussLegendre10 make_rule() {
  GaussLegendre10 rule;
  constexpr int n = 10;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussLegendre10& rule10() {
  static const GaussLegendre10 rule = make_rule();
  return rule;
}

// Solves Phi(x) = p for p in (0, 0.5].
double lower_quantile(double p) {
  double lo = -40.0;
  double hi = 0.0;
  while (hi - lo > 1e-2) {
    const double mid = 0.5 * (lo + hi);
    if (std_normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double residual = std_normal_cdf(x) - p;
    if (residual == 0.0) break;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double density = std_normal_pdf(x);
    double next = density > 0.0 ? x - residual / density : 0.5 * (lo + hi);
    // Safeguard: fall back to bisection of the current bracket.
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - x;
    x = next;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(x))) {
      break;
    }
  }
  return x;
}

}  // namespace

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_sf(double x) {
  require_finite(x, "std_normal_sf");
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "std_normal_quantile: probability must lie in (0,1), got " << p;
    throw Error(ErrorKind::Domain, msg.str());
  }
  if (p == 0.5) return 0.0;
  if (p < 0.5) return lower_quantile(p);
  // 1 - p is exact for p in [0.5, 1).
  return -lower_quantile(1.0 - p);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels) {
  if (!(a <= b)) {
    throw Error(ErrorKind::Domain, "integrate: lower limit exceeds upper limit");
  }
  if (panels < 1) {
    throw Error(ErrorKind::Domain, "integrate: panel count must be positive");
  }
  if (a == b) return 0.0;
  const auto& rule = rule10();
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double left = a + j * width;
    const double right = (j + 1 == panels) ? b : left + width;
    const double half = 0.5 * (right - left);
    const double mid = 0.5 * (right + left);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += half * panel;
  }
  return total;
}

Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::LinearAlgebra, "covariance must be a non-empty square matrix");
  }
  const double scale = matrix.diagonal().cwiseAbs().maxCoeff();
  if (!matrix.allFinite() ||
      (matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw Error(ErrorKind::LinearAlgebra, "covariance must be finite and symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::LinearAlgebra, "covariance is not positive definite");
  }
  const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
  if (pivots.minCoeff() <= 1e-12 * scale) {
    throw Error(ErrorKind::LinearAlgebra, "covariance is numerically singular");
  }
  return llt;
}

Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance,
                                std::int64_t count, std::uint64_t seed) {
  if (covariance.rows() != mean.size()) {
    throw Error(ErrorKind::Dimension, "sample_gaussian: mean and covariance sizes differ");
  }
  if (count < 0) {
    throw Error(ErrorKind::Domain, "sample_gaussian: negative count");
  }
  const auto llt = checked_cholesky(covariance);
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::Index n = mean.size();

  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd draws(n, count);
  Eigen::VectorXd z(n);
  for (std::int64_t j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(engine);
    draws.col(j) = mean + lower * z;
  }
  return draws;
}

}  // namespace robust_treat::gauss
