#include "hdpower/alternatives.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"

#include <cmath>
#include <random>
#include <type_traits>

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

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::mt19937_64 engine_for(std::uint64_t seed) { return std::mt19937_64(seed); }

RowMatrix normal_matrix(Index rows, Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  RowMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = scale * z(rng);
  }
  return out;
}

double laplace_draw(double sigma, std::mt19937_64& rng) {
  // Inverse CDF on u in (-1/2, 1/2); u = -1/2 exactly would give -inf.
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  double u = uniform(rng);
  while (u <= -0.5) u = uniform(rng);
  const double s = u < 0.0 ? -1.0 : 1.0;
  return -sigma * s * std::log1p(-2.0 * std::abs(u));
}

RowMatrix laplace_matrix(Index rows, Index cols, double sigma, std::mt19937_64& rng) {
  RowMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = laplace_draw(sigma, rng);
  }
  return out;
}

}  // namespace

void validate(const AlternativeSpec& spec) {
  std::visit(overloaded{
                 [](const GaussianMeanShift& s) {
                   require_dimension(s.d);
                   require_positive(s.sigma, "sigma");
                   if (!std::isfinite(s.delta)) throw InputError("delta must be finite");
                 },
                 [](const LaplaceMeanShift& s) {
                   require_dimension(s.d);
                   require_positive(s.sigma, "sigma");
                   if (!std::isfinite(s.delta)) throw InputError("delta must be finite");
                 },
                 [](const GaussianDiffVariance& s) {
                   require_dimension(s.d);
                   require_positive(s.sigma, "sigma");
                   require_positive(s.tau, "tau");
                 },
                 [](const GaussianDependent& s) {
                   require_dimension(s.d);
                   if (s.k < 1 || s.k > s.d) {
                     throw InputError("k must satisfy 1 <= k <= d, got k=" + std::to_string(s.k) +
                                      " d=" + std::to_string(s.d));
                   }
                   if (!(std::abs(s.rho) < 1.0)) {
                     throw InputError("|rho| must be below 1, got " + format_double(s.rho));
                   }
                 },
             },
             spec);
}

Index dimension(const AlternativeSpec& spec) {
  return std::visit([](const auto& s) { return s.d; }, spec);
}

AlternativeSpec with_dimension(const AlternativeSpec& spec, Index d) {
  return std::visit(
      [d](auto s) -> AlternativeSpec {
        s.d = d;
        return s;
      },
      spec);
}

bool is_two_sample(const AlternativeSpec& spec) {
  return !std::holds_alternative<GaussianDependent>(spec);
}

bool is_null(const AlternativeSpec& spec) {
  return std::visit(overloaded{
                        [](const GaussianMeanShift& s) { return s.delta == 0.0; },
                        [](const LaplaceMeanShift& s) { return s.delta == 0.0; },
                        [](const GaussianDiffVariance& s) { return s.tau == s.sigma; },
                        [](const GaussianDependent& s) { return s.rho == 0.0; },
                    },
                    spec);
}

std::string scenario_id(const AlternativeSpec& spec) {
  return std::visit(overloaded{
                        [](const GaussianMeanShift& s) -> std::string {
                          return s.mode == ShiftMode::FirstCoordinate ? "gaussian-mean"
                                                                      : "gaussian-mean-all";
                        },
                        [](const LaplaceMeanShift&) -> std::string { return "laplace-mean"; },
                        [](const GaussianDiffVariance&) -> std::string { return "gaussian-var"; },
                        [](const GaussianDependent& s) -> std::string {
                          return "gaussian-dep-k" + std::to_string(s.k);
                        },
                    },
                    spec);
}

std::string describe(const AlternativeSpec& spec) {
  const std::string d = "d=" + std::to_string(dimension(spec));
  return std::visit(
      overloaded{
          [&](const GaussianMeanShift& s) {
            return scenario_id(spec) + " " + d + " sigma=" + format_double(s.sigma) +
                   " delta=" + format_double(s.delta);
          },
          [&](const LaplaceMeanShift& s) {
            return scenario_id(spec) + " " + d + " sigma=" + format_double(s.sigma) +
                   " delta=" + format_double(s.delta);
          },
          [&](const GaussianDiffVariance& s) {
            return scenario_id(spec) + " " + d + " sigma=" + format_double(s.sigma) +
                   " tau=" + format_double(s.tau);
          },
          [&](const GaussianDependent& s) {
            return scenario_id(spec) + " " + d + " k=" + std::to_string(s.k) +
                   " rho=" + format_double(s.rho);
          },
      },
      spec);
}

Divergence divergence(const AlternativeSpec& spec) {
  validate(spec);
  using Kind = Divergence::Kind;
  return std::visit(
      overloaded{
          [](const GaussianMeanShift& s) {
            const double per = s.delta * s.delta / (2.0 * s.sigma * s.sigma);
            const double coords =
                s.mode == ShiftMode::FirstCoordinate ? 1.0 : static_cast<double>(s.d);
            return Divergence{Kind::KL, coords * per};
          },
          [](const LaplaceMeanShift& s) {
            const double r = std::abs(s.delta) / s.sigma;
            return Divergence{Kind::KL, std::expm1(-r) + r};
          },
          [](const GaussianDiffVariance& s) {
            const double ratio = (s.tau * s.tau) / (s.sigma * s.sigma);
            return Divergence{Kind::KL, 0.5 * (ratio - 1.0 - std::log(ratio))};
          },
          [](const GaussianDependent& s) {
            return Divergence{Kind::MI,
                              -0.5 * static_cast<double>(s.k) * std::log1p(-s.rho * s.rho)};
          },
      },
      spec);
}

std::pair<DataMatrix, DataMatrix> sample_two_sample(const AlternativeSpec& spec, Index n, Index m,
                                                    std::uint64_t seed) {
  validate(spec);
  if (!is_two_sample(spec)) {
    throw ModeError("scenario " + scenario_id(spec) + " is an independence scenario");
  }
  if (n < 1 || m < 1) throw InputError("sample sizes must be positive");
  auto rng = engine_for(seed);
  const Index d = dimension(spec);
  return std::visit(
      overloaded{
          [&](const GaussianMeanShift& s) {
            RowMatrix x = normal_matrix(n, d, s.sigma, rng);
            RowMatrix y = normal_matrix(m, d, s.sigma, rng);
            if (s.mode == ShiftMode::FirstCoordinate) {
              y.col(0).array() += s.delta;
            } else {
              y.array() += s.delta;
            }
            return std::pair{DataMatrix(std::move(x)), DataMatrix(std::move(y))};
          },
          [&](const LaplaceMeanShift& s) {
            RowMatrix x = laplace_matrix(n, d, s.sigma, rng);
            RowMatrix y = laplace_matrix(m, d, s.sigma, rng);
            y.col(0).array() += s.delta;
            return std::pair{DataMatrix(std::move(x)), DataMatrix(std::move(y))};
          },
          [&](const GaussianDiffVariance& s) {
            RowMatrix x = normal_matrix(n, d, s.sigma, rng);
            x.col(d - 1) *= s.tau / s.sigma;
            RowMatrix y = normal_matrix(m, d, s.sigma, rng);
            return std::pair{DataMatrix(std::move(x)), DataMatrix(std::move(y))};
          },
          [&](const GaussianDependent&) -> std::pair<DataMatrix, DataMatrix> {
            throw ModeError("unreachable");
          },
      },
      spec);
}

std::pair<DataMatrix, DataMatrix> sample_joint(const GaussianDependent& spec, Index n,
                                               std::uint64_t seed) {
  validate(spec);
  if (n < 1) throw InputError("sample size must be positive");
  auto rng = engine_for(seed);
  RowMatrix x = normal_matrix(n, spec.d, 1.0, rng);
  RowMatrix y = normal_matrix(n, spec.d, 1.0, rng);
  // Lower-triangular factor of [[1, rho], [rho, 1]] applied per paired coordinate.
  const double c = std::sqrt(1.0 - spec.rho * spec.rho);
  for (Index j = 0; j < spec.k; ++j) {
    y.col(j) = spec.rho * x.col(j) + c * y.col(j);
  }
  return {DataMatrix(std::move(x)), DataMatrix(std::move(y))};
}

Eigen::MatrixXd joint_covariance(const GaussianDependent& spec) {
  validate(spec);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2 * spec.d, 2 * spec.d);
  for (Index i = 0; i < spec.k; ++i) {
    sigma(i, spec.d + i) = spec.rho;
    sigma(spec.d + i, i) = spec.rho;
  }
  return sigma;
}

}  // namespace hdpower
