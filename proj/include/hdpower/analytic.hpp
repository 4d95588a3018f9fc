#pragma once

#include "hdpower/alternatives.hpp"
#include "hdpower/kernels.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hdpower {

enum class Method { Exact, Taylor, RegimeFormula, Quadrature, MonteCarlo };

std::string to_string(Method method);

/// A population MMD^2 value with the formula that produced it and its inputs.
struct AnalyticPrediction {
  double value = 0.0;
  Method method = Method::Exact;
  std::vector<std::pair<std::string, double>> params;
};

// Gaussian kernel exp(-||x - y||^2 / gamma^2), Gaussian distributions.

/// Exact MMD^2 between N(mu1, S) and N(mu2, S):
///   2 (gamma^2/2)^{d/2} (1 - exp(-D^T (S + gamma^2 I/2)^{-1} D / 4)) / |S + gamma^2 I/2|^{1/2}
/// with D = mu1 - mu2. This closed form is the population MMD^2 of the kernel
/// exp(-||x - y||^2 / (2 gamma^2)); for the kernel above pass gamma / sqrt(2).
/// Throws InputError when S + gamma^2 I/2 is not positive definite or S is not
/// symmetric.
double mmd2_gaussian_exact(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                           const Eigen::MatrixXd& covariance, double gamma);

/// Same for S = sigma^2 I and ||D|| = delta_norm, in closed form.
double mmd2_gaussian_exact(double delta_norm, double sigma, double gamma, Index d);

/// First-order expansion: ||D||^2 / (gamma^2 (1 + 2 sigma^2/gamma^2)^{d/2 + 1}).
double mmd2_gaussian_taylor(double delta_norm, double sigma, double gamma, Index d);

/// Bandwidth regimes gamma = sigma d^{1/2 - eps} (Obs1), sigma d^{1/2} (Obs2),
/// sigma d^{1/2 + eps} (Obs3) for the Gaussian kernel, and gamma = sigma d^{1 - eps}
/// (Obs4), sigma d^{1 + eps} (Obs5) for the Laplace kernel.
enum class Regime { GaussianObs1, GaussianObs2, GaussianObs3, LaplaceObs4, LaplaceObs5 };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& text);

/// Large-d approximation for the regime. Valid eps ranges: Obs1 (0, 1/2],
/// Obs2 exactly 0, Obs3 (0, inf), Obs4 (0, 1), Obs5 [0, inf).
double regime_prediction(Regime regime, double delta_norm, double sigma, Index d, double eps);

/// Bandwidth the regime formula assumes.
double regime_bandwidth(Regime regime, double sigma, Index d, double eps);

// Laplace kernel exp(-||x - y||_1 / gamma), product Laplace(sigma) distributions.

/// First-order expansion: ||D||^2 / (2 sigma gamma (1 + sigma/gamma)^d).
double mmd2_laplace_taylor(double delta_norm, double sigma, double gamma, Index d);

/// E exp(-|X - Y| / gamma) for X ~ Laplace(0, sigma), Y ~ Laplace(mu, sigma), d = 1.
double laplace_cross_expectation(double mu, double sigma, double gamma);

/// Exact one-dimensional MMD^2 between Laplace(0, sigma) and Laplace(mu, sigma).
double laplace_mmd2_exact_1d(double mu, double sigma, double gamma);

/// Exact MMD^2 for the d-dimensional product pair shifted by mu e1; the kernel
/// factorizes, so this is 2 G(0)^{d-1} (G(0) - G(mu)).
double laplace_mmd2_exact(double mu, double sigma, double gamma, Index d);

// Gaussian kernel, variance difference in one coordinate (tau vs sigma).

/// Expansion: (tau^2 - sigma^2)^2 / (gamma^4 (1 + 4 sigma^2/gamma^2)^{(d-1)/2}).
double mmd2_diffvar_taylor(double sigma, double tau, double gamma, Index d);

/// Exact value for N(0, diag(sigma^2 I_{d-1}, tau^2)) against N(0, sigma^2 I_d).
double mmd2_diffvar_exact(double sigma, double tau, double gamma, Index d);

// Spectral representation in one dimension.

struct Distribution1d {
  enum class Family { Gaussian, Laplace };
  Family family = Family::Gaussian;
  double mu = 0.0;
  /// Standard deviation for Gaussian, scale for Laplace.
  double sigma = 1.0;
};

/// Integral of s(w) |phi_p(w) - phi_q(w)|^2 over the real line, where s is the
/// kernel's spectral density: N(0, 2/gamma^2) for the Gaussian kernel and
/// gamma / (pi (1 + gamma^2 w^2)) for the Laplace kernel. Throws NumericalError
/// when the adaptive quadrature misses its error target.
double mmd2_spectral_1d(const Distribution1d& p, const Distribution1d& q, const KernelSpec& kernel);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  Index replicates = 0;
};

/// Mean of `replicates` unbiased MMD^2 estimates, each on fresh N-vs-N draws
/// from the scenario; std_error is the replicate standard deviation / sqrt(R).
/// Replicate r uses the seed derived from (seed, r), so results do not depend
/// on `threads`.
MonteCarloEstimate mmd2_montecarlo(const AlternativeSpec& spec, const KernelSpec& kernel, Index n,
                                   std::uint64_t seed, Index replicates = 10, unsigned threads = 1);

}  // namespace hdpower
