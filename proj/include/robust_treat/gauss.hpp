#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace robust_treat::gauss {

/// Standard normal c.d.f. Absolute error below 1e-12 on the whole real line.
/// Throws Error(Domain) on non-finite input.
double std_normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x);

double std_normal_pdf(double x);

/// Inverse of std_normal_cdf on the open interval (0, 1).
///
/// Bisection brackets the root to about 1e-2, Newton steps then polish it.
/// The lower tail is always solved directly and the upper tail by symmetry,
/// so |Phi(x) - p| <= 1e-12 holds everywhere and the relative accuracy in
/// the far tails is close to machine precision.
double std_normal_quantile(double p);

/// Composite Gauss-Legendre quadrature with 10 nodes per panel.
///
/// Each panel is exact for polynomials of degree <= 19; for smooth integrands
/// the composite error decays like h^20 in the panel width h.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels);

/// Draws `count` vectors from N(mean, covariance). Column j of the result is
/// draw j. The output is a pure function of the arguments: a fresh
/// mt19937_64 seeded with `seed` feeds standard normals that are mapped
/// through the lower Cholesky factor.
Eigen::MatrixXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance,
                                std::int64_t count, std::uint64_t seed);

/// Half-width of the integration window for Gaussian-tail integrands, in
/// standard deviations. Mass outside is below 2e-17.
inline constexpr double kTailClip = 8.5;

/// Cholesky factorization that rejects matrices which are not symmetric
/// positive definite: asymmetric input, failed factorization, or a smallest
/// pivot at or below 1e-12 times the largest diagonal entry all throw
/// Error(LinearAlgebra).
Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& matrix);

}  // namespace robust_treat::gauss
