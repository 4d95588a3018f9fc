#include "hdpower/analytic.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"
#include "hdpower/parallel.hpp"
#include "hdpower/statistics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace hdpower {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be positive and finite, got " + format_double(v));
  }
}

void require_dimension(Index d) {
  if (d < 1) throw InputError("dimension must be at least 1, got " + std::to_string(d));
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InputError(std::string(name) + " must be finite");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::Exact: return "exact";
    case Method::Taylor: return "taylor";
    case Method::RegimeFormula: return "regime";
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "montecarlo";
  }
  return "unknown";
}

double mmd2_gaussian_exact(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                           const Eigen::MatrixXd& covariance, double gamma) {
  require_positive(gamma, "gamma");
  const Index d = mu1.size();
  require_dimension(d);
  if (mu2.size() != d || covariance.rows() != d || covariance.cols() != d) {
    throw InputError("mean vectors and covariance must share dimension " + std::to_string(d));
  }
  if (!mu1.allFinite() || !mu2.allFinite() || !covariance.allFinite()) {
    throw InputError("means and covariance must be finite");
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
    throw InputError("covariance must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(covariance).info() != Eigen::Success) {
    throw InputError("covariance must be positive definite");
  }
  const double half_g2 = 0.5 * gamma * gamma;
  Eigen::MatrixXd shifted = covariance;
  shifted.diagonal().array() += half_g2;
  const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw InputError("covariance + gamma^2 I / 2 is not positive definite");
  const Eigen::VectorXd delta = mu1 - mu2;
  const double quad = delta.dot(llt.solve(delta));
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_scale = 0.5 * static_cast<double>(d) * std::log(half_g2) - 0.5 * log_det;
  return 2.0 * std::exp(log_scale) * -std::expm1(-quad / 4.0);
}

double mmd2_gaussian_exact(double delta_norm, double sigma, double gamma, Index d) {
  require_finite(delta_norm, "delta norm");
  require_positive(sigma, "sigma");
  require_positive(gamma, "gamma");
  require_dimension(d);
  const double s2 = sigma * sigma;
  const double g2 = gamma * gamma;
  const double shrink = std::exp(-0.5 * static_cast<double>(d) * std::log1p(2.0 * s2 / g2));
  return 2.0 * shrink * -std::expm1(-delta_norm * delta_norm / (4.0 * (s2 + 0.5 * g2)));
}

double mmd2_gaussian_taylor(double delta_norm, double sigma, double gamma, Index d) {
  require_finite(delta_norm, "delta norm");
  require_positive(sigma, "sigma");
  require_positive(gamma, "gamma");
  require_dimension(d);
  const double g2 = gamma * gamma;
  const double power = 0.5 * static_cast<double>(d) + 1.0;
  return delta_norm * delta_norm / g2 *
         std::exp(-power * std::log1p(2.0 * sigma * sigma / g2));
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::GaussianObs1: return "gaussian-under";
    case Regime::GaussianObs2: return "gaussian-median";
    case Regime::GaussianObs3: return "gaussian-over";
    case Regime::LaplaceObs4: return "laplace-under";
    case Regime::LaplaceObs5: return "laplace-over";
  }
  return "unknown";
}

Regime parse_regime(const std::string& text) {
  for (auto r : {Regime::GaussianObs1, Regime::GaussianObs2, Regime::GaussianObs3,
                 Regime::LaplaceObs4, Regime::LaplaceObs5}) {
    if (text == to_string(r)) return r;
  }
  throw InputError("unknown regime '" + text +
                   "' (expected gaussian-under, gaussian-median, gaussian-over, laplace-under, "
                   "laplace-over)");
}

namespace {

void check_eps(Regime regime, double eps) {
  bool ok = std::isfinite(eps);
  const char* range = "";
  switch (regime) {
    case Regime::GaussianObs1:
      ok = ok && eps > 0.0 && eps <= 0.5;
      range = "(0, 1/2]";
      break;
    case Regime::GaussianObs2:
      ok = ok && eps == 0.0;
      range = "{0}";
      break;
    case Regime::GaussianObs3:
      ok = ok && eps > 0.0;
      range = "(0, inf)";
      break;
    case Regime::LaplaceObs4:
      ok = ok && eps > 0.0 && eps < 1.0;
      range = "(0, 1)";
      break;
    case Regime::LaplaceObs5:
      ok = ok && eps >= 0.0;
      range = "[0, inf)";
      break;
  }
  if (!ok) {
    throw InputError("eps=" + format_double(eps) + " outside " + range + " for regime " +
                     to_string(regime));
  }
}

}  // namespace

double regime_prediction(Regime regime, double delta_norm, double sigma, Index d, double eps) {
  require_finite(delta_norm, "delta norm");
  require_positive(sigma, "sigma");
  require_dimension(d);
  check_eps(regime, eps);
  const double dd = static_cast<double>(d);
  const double num = delta_norm * delta_norm;
  const double s2 = sigma * sigma;
  switch (regime) {
    case Regime::GaussianObs1:
      return num / (s2 * (std::pow(dd, 1.0 - 2.0 * eps) + 2.0) * std::exp(std::pow(dd, 2.0 * eps) / 2.0));
    case Regime::GaussianObs2:
      return num / (s2 * (dd + 2.0) * std::numbers::e);
    case Regime::GaussianObs3:
      return num /
             (s2 * (std::pow(dd, 1.0 + 2.0 * eps) + 2.0) * std::exp(1.0 / (2.0 * std::pow(dd, 2.0 * eps))));
    case Regime::LaplaceObs4:
      return num / (2.0 * s2 * std::pow(dd, 1.0 - eps) * std::exp(std::pow(dd, eps)));
    case Regime::LaplaceObs5:
      return num / (2.0 * s2 * std::pow(dd, 1.0 + eps) * std::exp(1.0 / std::pow(dd, eps)));
  }
  return 0.0;
}

double regime_bandwidth(Regime regime, double sigma, Index d, double eps) {
  require_positive(sigma, "sigma");
  require_dimension(d);
  check_eps(regime, eps);
  const double dd = static_cast<double>(d);
  switch (regime) {
    case Regime::GaussianObs1: return sigma * std::pow(dd, 0.5 - eps);
    case Regime::GaussianObs2: return sigma * std::sqrt(dd);
    case Regime::GaussianObs3: return sigma * std::pow(dd, 0.5 + eps);
    case Regime::LaplaceObs4: return sigma * std::pow(dd, 1.0 - eps);
    case Regime::LaplaceObs5: return sigma * std::pow(dd, 1.0 + eps);
  }
  return 0.0;
}

double mmd2_laplace_taylor(double delta_norm, double sigma, double gamma, Index d) {
  require_finite(delta_norm, "delta norm");
  require_positive(sigma, "sigma");
  require_positive(gamma, "gamma");
  require_dimension(d);
  return delta_norm * delta_norm / (2.0 * sigma * gamma) *
         std::exp(-static_cast<double>(d) * std::log1p(sigma / gamma));
}

double laplace_cross_expectation(double mu, double sigma, double gamma) {
  require_finite(mu, "mu");
  require_positive(sigma, "sigma");
  require_positive(gamma, "gamma");
  // X - Y + mu has the density (a/4)(1 + a|z|) exp(-a|z|) shifted by mu; the
  // kernel integral splits at 0 and t.
  const double a = 1.0 / sigma;
  const double b = 1.0 / gamma;
  const double c = a + b;
  const double e = a - b;
  const double t = std::abs(mu);
  const double x = e * t;
  double first;   // integral over [0, t] of exp(-e z)
  double second;  // integral over [0, t] of a z exp(-e z)
  if (std::abs(x) < 1e-2) {
    // Series around e = 0, which also covers the removable singularity at sigma = gamma.
    first = t * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x * x * x * x / 120.0 -
                 x * x * x * x * x / 720.0);
    second = a * t * t *
             (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0 + x * x * x * x / 144.0 -
              x * x * x * x * x / 840.0);
  } else {
    first = -std::expm1(-x) / e;
    second = a * (1.0 - std::exp(-x) * (1.0 + x)) / (e * e);
  }
  const double eb = std::exp(-b * t);
  const double ea = std::exp(-a * t);
  const double tail = 1.0 / c + a / (c * c);
  return a / 4.0 * (eb * tail + ea * (tail + a * t / c) + eb * (first + second));
}

double laplace_mmd2_exact_1d(double mu, double sigma, double gamma) {
  const double g0 = laplace_cross_expectation(0.0, sigma, gamma);
  const double gm = laplace_cross_expectation(mu, sigma, gamma);
  return std::max(2.0 * (g0 - gm), 0.0);
}

double laplace_mmd2_exact(double mu, double sigma, double gamma, Index d) {
  require_dimension(d);
  const double g0 = laplace_cross_expectation(0.0, sigma, gamma);
  const double gm = laplace_cross_expectation(mu, sigma, gamma);
  return std::max(2.0 * std::pow(g0, static_cast<double>(d - 1)) * (g0 - gm), 0.0);
}

double mmd2_diffvar_taylor(double sigma, double tau, double gamma, Index d) {
  require_positive(sigma, "sigma");
  require_positive(tau, "tau");
  require_positive(gamma, "gamma");
  require_dimension(d);
  const double g2 = gamma * gamma;
  const double diff = tau * tau - sigma * sigma;
  return diff * diff / (g2 * g2) *
         std::exp(-0.5 * static_cast<double>(d - 1) * std::log1p(4.0 * sigma * sigma / g2));
}

double mmd2_diffvar_exact(double sigma, double tau, double gamma, Index d) {
  require_positive(sigma, "sigma");
  require_positive(tau, "tau");
  require_positive(gamma, "gamma");
  require_dimension(d);
  const double g2 = gamma * gamma;
  const double s2 = sigma * sigma;
  const double t2 = tau * tau;
  const double rest = std::exp(-0.5 * static_cast<double>(d - 1) * std::log1p(4.0 * s2 / g2));
  const double last = 1.0 / std::sqrt(1.0 + 4.0 * t2 / g2) + 1.0 / std::sqrt(1.0 + 4.0 * s2 / g2) -
                      2.0 / std::sqrt(1.0 + 2.0 * (t2 + s2) / g2);
  return std::max(rest * last, 0.0);
}

namespace {

double cf_magnitude(const Distribution1d& p, double w) {
  const double sw = p.sigma * w;
  return p.family == Distribution1d::Family::Gaussian ? std::exp(-0.5 * sw * sw)
                                                      : 1.0 / (1.0 + sw * sw);
}

double spectral_density(const KernelSpec& k, double w) {
  const double g = k.bandwidth;
  if (k.family == KernelFamily::Gaussian) {
    // N(0, 2/g^2)
    return g / (2.0 * std::sqrt(std::numbers::pi)) * std::exp(-0.25 * g * g * w * w);
  }
  return g / (std::numbers::pi * (1.0 + g * g * w * w));
}

}  // namespace

double mmd2_spectral_1d(const Distribution1d& p, const Distribution1d& q,
                        const KernelSpec& kernel) {
  kernel.validate();
  for (const auto* dist : {&p, &q}) {
    require_finite(dist->mu, "mu");
    require_positive(dist->sigma, "sigma");
  }
  const double shift = p.mu - q.mu;
  // |phi_p - phi_q|^2 with phi(w) = A(w) exp(i mu w); even in w.
  auto integrand = [&](double w) {
    const double ap = cf_magnitude(p, w);
    const double aq = cf_magnitude(q, w);
    return spectral_density(kernel, w) * (ap * ap + aq * aq - 2.0 * ap * aq * std::cos(shift * w));
  };
  auto envelope = [&](double w) {
    const double s = cf_magnitude(p, w) + cf_magnitude(q, w);
    return spectral_density(kernel, w) * s * s;
  };

  // Truncate once the envelope tail is negligible; every envelope here decays
  // at least like w^-6, so its tail beyond W is below W * envelope(W).
  constexpr double kTailTarget = 1e-13;
  double upper = 1.0;
  while (upper * envelope(upper) > kTailTarget) {
    upper *= 2.0;
    if (upper > 1e9) {
      throw NumericalError("spectral quadrature: integrand tail does not vanish (envelope " +
                           format_double(envelope(upper)) + " at w=" + format_double(upper) + ")");
    }
  }

  // Panels no wider than a quarter period of the oscillating term.
  const double width = shift == 0.0 ? upper : std::min(upper, std::numbers::pi / (2.0 * std::abs(shift)));
  const auto panels = static_cast<long>(std::ceil(upper / width));
  if (panels > 200000) {
    throw NumericalError("spectral quadrature: " + std::to_string(panels) +
                         " panels needed for shift " + format_double(shift));
  }
  double total = 0.0;
  double error = 0.0;
  for (long i = 0; i < panels; ++i) {
    const double lo = static_cast<double>(i) * width;
    const double hi = std::min(upper, lo + width);
    double panel_error = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 10,
                                                                          1e-14, &panel_error);
    error += panel_error;
  }
  total *= 2.0;
  error *= 2.0;
  if (!std::isfinite(total) || error > 1e-10 * std::max(1.0, std::abs(total))) {
    throw NumericalError("spectral quadrature did not converge: value " + format_double(total) +
                         ", error estimate " + format_double(error) + ", upper limit " +
                         format_double(upper) + ", panels " + std::to_string(panels));
  }
  return std::max(total, 0.0);
}

MonteCarloEstimate mmd2_montecarlo(const AlternativeSpec& spec, const KernelSpec& kernel, Index n,
                                   std::uint64_t seed, Index replicates, unsigned threads) {
  validate(spec);
  kernel.validate();
  if (!is_two_sample(spec)) throw ModeError("Monte Carlo MMD needs a two-sample scenario");
  if (n < 100) throw InputError("Monte Carlo sample size must be at least 100");
  if (replicates < 2) throw InputError("Monte Carlo needs at least two replicates");
  std::vector<double> values(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](std::int64_t r) {
    auto [x, y] = sample_two_sample(spec, n, n, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    values[static_cast<std::size_t>(r)] = mmd2_unbiased_streaming(x, y, kernel, Precision::Single);
  });
  const double count = static_cast<double>(replicates);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count), replicates};
}

}  // namespace hdpower
