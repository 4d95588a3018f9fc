#include "hdpower/permutation.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"
#include "hdpower/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace hdpower {

std::string to_string(TestMode mode) {
  return mode == TestMode::TwoSample ? "two-sample" : "independence";
}

void PermutationConfig::validate() const {
  if (permutations < 1) throw InputError("permutation count B must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1), got " + format_double(alpha));
  }
}

double null_quantile(std::span<const double> null_sample, double observed, double alpha) {
  if (null_sample.empty()) throw InputError("null sample is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1), got " + format_double(alpha));
  }
  std::vector<double> pooled(null_sample.begin(), null_sample.end());
  pooled.push_back(observed);
  const auto total = static_cast<double>(pooled.size());
  // The 1e-9 guard keeps exact products such as 0.95 * 20 = 19 from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * total - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, pooled.size());
  std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   pooled.end());
  return pooled[rank - 1];
}

TwoSamplePermuter::TwoSamplePermuter(Eigen::MatrixXd pooled, Index n, Statistic statistic)
    : pooled_(std::move(pooled)), n_(n), statistic_(statistic) {
  if (pooled_.rows() != pooled_.cols()) throw InputError("pooled matrix must be square");
  if (!is_two_sample(statistic_)) throw ModeError(to_string(statistic_) + " is not a two-sample statistic");
  const Index m = pooled_.rows() - n_;
  if (n_ < 1 || m < 1) throw InsufficientSampleError("both groups need at least one point");
  if (statistic_ == Statistic::MMD2Unbiased && (n_ < 2 || m < 2)) {
    throw InsufficientSampleError("unbiased MMD needs at least two points per sample");
  }
  row_sums_ = pooled_.rowwise().sum();
  total_ = row_sums_.sum();
  trace_ = pooled_.trace();
}

double TwoSamplePermuter::evaluate(std::span<const Index> order) const {
  const Index big_n = pooled_.rows();
  const double* data = pooled_.data();
  double within_x = 0.0;
  double row_x = 0.0;
  double trace_x = 0.0;
  for (Index b = 0; b < n_; ++b) {
    const Index ob = order[static_cast<std::size_t>(b)];
    const double* col = data + ob * big_n;
    double s = 0.0;
    for (Index a = 0; a < n_; ++a) s += col[order[static_cast<std::size_t>(a)]];
    within_x += s;
    row_x += row_sums_[ob];
    trace_x += col[ob];
  }
  const double cross = row_x - within_x;
  const double within_y = total_ - within_x - 2.0 * cross;
  const double n = static_cast<double>(n_);
  const double m = static_cast<double>(big_n - n_);
  switch (statistic_) {
    case Statistic::MMD2Biased:
      return std::max(within_x / (n * n) + within_y / (m * m) - 2.0 * cross / (n * m), 0.0);
    case Statistic::MMD2Unbiased:
      return (within_x - trace_x) / (n * (n - 1.0)) +
             (within_y - (trace_ - trace_x)) / (m * (m - 1.0)) - 2.0 * cross / (n * m);
    case Statistic::EnergyTwoSample:
      return 2.0 * cross / (n * m) - within_x / (n * n) - within_y / (m * m);
    default:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double TwoSamplePermuter::observed() const {
  std::vector<Index> identity(static_cast<std::size_t>(pooled_.rows()));
  std::iota(identity.begin(), identity.end(), Index{0});
  return evaluate(identity);
}

IndependencePermuter::IndependencePermuter(Eigen::MatrixXd a_centered, Eigen::MatrixXd b_centered,
                                           double scale)
    : a_(std::move(a_centered)), b_(std::move(b_centered)), scale_(scale) {
  if (a_.rows() != a_.cols() || b_.rows() != b_.cols() || a_.rows() != b_.rows()) {
    throw PairingError("centered matrices must be square and of equal size");
  }
}

double IndependencePermuter::evaluate(std::span<const Index> perm) const {
  const Index n = a_.rows();
  const double* b = b_.data();
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double* acol = a_.data() + j * n;
    const double* bcol = b + perm[static_cast<std::size_t>(j)] * n;
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += acol[i] * bcol[perm[static_cast<std::size_t>(i)]];
    total += s;
  }
  return scale_ * total;
}

double IndependencePermuter::observed() const {
  std::vector<Index> identity(static_cast<std::size_t>(a_.rows()));
  std::iota(identity.begin(), identity.end(), Index{0});
  return evaluate(identity);
}

SampleGeometry::SampleGeometry(const DataMatrix& x, const DataMatrix& y, TestMode mode)
    : x_(x), y_(y), mode_(mode) {
  if (mode_ == TestMode::TwoSample) {
    require_same_dimension(x_, y_);
  } else {
    require_paired(x_, y_);
  }
}

const DataMatrix& SampleGeometry::pooled() {
  if (!pooled_) pooled_.emplace(DataMatrix::stack(x_, y_));
  return *pooled_;
}

const Eigen::MatrixXd& SampleGeometry::pooled_squared_l2() {
  if (!pooled_sq_) pooled_sq_ = squared_distance_matrix(pooled());
  return *pooled_sq_;
}

const Eigen::MatrixXd& SampleGeometry::pooled_distances(DistanceMetric metric) {
  if (metric == DistanceMetric::L1) {
    if (!pooled_l1_) pooled_l1_ = distance_matrix(pooled(), DistanceMetric::L1);
    return *pooled_l1_;
  }
  if (!pooled_l2_) pooled_l2_ = pooled_squared_l2().cwiseSqrt();
  return *pooled_l2_;
}

const Eigen::MatrixXd& SampleGeometry::pooled_native(KernelFamily family) {
  return family == KernelFamily::Gaussian ? pooled_squared_l2()
                                          : pooled_distances(DistanceMetric::L1);
}

const Eigen::MatrixXd& SampleGeometry::squared_l2(bool second) {
  auto& slot = sq_[second ? 1 : 0];
  if (!slot) slot = squared_distance_matrix(sample(second));
  return *slot;
}

const Eigen::MatrixXd& SampleGeometry::distances(bool second, DistanceMetric metric) {
  if (metric == DistanceMetric::L1) {
    auto& slot = l1_[second ? 1 : 0];
    if (!slot) slot = distance_matrix(sample(second), DistanceMetric::L1);
    return *slot;
  }
  auto& slot = l2_[second ? 1 : 0];
  if (!slot) slot = squared_l2(second).cwiseSqrt();
  return *slot;
}

const Eigen::MatrixXd& SampleGeometry::native(bool second, KernelFamily family) {
  return family == KernelFamily::Gaussian ? squared_l2(second)
                                          : distances(second, DistanceMetric::L1);
}

double SampleGeometry::median_bandwidth_pooled() {
  if (!pooled_median_) pooled_median_ = median_from_squared_distances(pooled_squared_l2());
  return *pooled_median_;
}

double SampleGeometry::median_bandwidth(bool second) {
  auto& slot = median_[second ? 1 : 0];
  if (!slot) slot = median_from_squared_distances(squared_l2(second));
  return *slot;
}

namespace {

double resolve_pooled(const BandwidthRule& rule, SampleGeometry& g) {
  validate(rule);
  if (std::holds_alternative<MedianHeuristic>(rule)) return g.median_bandwidth_pooled();
  return resolve_bandwidth(rule, g.x());
}

double resolve_one(const BandwidthRule& rule, SampleGeometry& g, bool second) {
  validate(rule);
  if (std::holds_alternative<MedianHeuristic>(rule)) return g.median_bandwidth(second);
  return resolve_bandwidth(rule, second ? g.y() : g.x());
}

// Scale turning sum(A~ .* B~) into a correlation; throws on a constant sample.
double correlation_scale(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  const double aa = a.cwiseProduct(a).sum();
  const double bb = b.cwiseProduct(b).sum();
  if (!(aa > 0.0) || !(bb > 0.0)) {
    throw DegenerateDataError(std::string(what) + " undefined: non-positive denominator");
  }
  return 1.0 / std::sqrt(aa * bb);
}

}  // namespace

PreparedStatistic prepare_statistic(const StatisticKind& kind, SampleGeometry& g) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Statistic s = kind.statistic;
  if (is_two_sample(s) != (g.mode() == TestMode::TwoSample)) {
    throw ModeError("statistic " + to_string(s) + " cannot be used in " + to_string(g.mode()) +
                    " mode");
  }
  if (g.mode() == TestMode::TwoSample) {
    const Index n = g.x().n();
    if (s == Statistic::EnergyTwoSample) {
      return {TwoSamplePermuter(g.pooled_distances(kind.metric), n, s), nan, nan};
    }
    const double gamma = resolve_pooled(kind.bandwidth, g);
    const KernelSpec spec{kind.kernel, gamma};
    return {TwoSamplePermuter(kernel_from_distances(g.pooled_native(kind.kernel), spec), n, s),
            gamma, gamma};
  }

  const Index n = g.x().n();
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  switch (s) {
    case Statistic::DCov2:
    case Statistic::DCor2: {
      if (n < 2) throw InsufficientSampleError("distance covariance needs n >= 2");
      Eigen::MatrixXd a = double_center(g.distances(false, kind.metric));
      Eigen::MatrixXd b = double_center(g.distances(true, kind.metric));
      const double scale =
          s == Statistic::DCov2 ? 1.0 / nn : correlation_scale(a, b, "distance correlation");
      return {IndependencePermuter(std::move(a), std::move(b), scale), nan, nan};
    }
    case Statistic::UDCor2: {
      if (n < 4) throw InsufficientSampleError("unbiased distance correlation needs n >= 4");
      Eigen::MatrixXd a = u_center(g.distances(false, kind.metric));
      Eigen::MatrixXd b = u_center(g.distances(true, kind.metric));
      const double scale = correlation_scale(a, b, "unbiased distance correlation");
      return {IndependencePermuter(std::move(a), std::move(b), scale), nan, nan};
    }
    case Statistic::HSIC: {
      if (n < 2) throw InsufficientSampleError("HSIC needs n >= 2");
      const double gx = resolve_one(kind.bandwidth, g, false);
      const double gy = resolve_one(kind.bandwidth, g, true);
      Eigen::MatrixXd k = double_center(kernel_from_distances(g.native(false, kind.kernel),
                                                              KernelSpec{kind.kernel, gx}));
      Eigen::MatrixXd l = double_center(kernel_from_distances(g.native(true, kind.kernel),
                                                              KernelSpec{kind.kernel, gy}));
      return {IndependencePermuter(std::move(k), std::move(l), 1.0 / nn), gx, gy};
    }
    default:
      break;
  }
  throw ModeError("statistic " + to_string(s) + " has no independence form");
}

PermutationResult run_permutations(const PreparedStatistic& prepared,
                                   const PermutationConfig& cfg) {
  cfg.validate();
  PermutationResult result;
  result.gamma_x = prepared.gamma_x;
  result.gamma_y = prepared.gamma_y;
  result.null_sample.resize(static_cast<std::size_t>(cfg.permutations));

  std::visit(
      [&](const auto& permuter) {
        using P = std::decay_t<decltype(permuter)>;
        Index size = 0;
        if constexpr (std::is_same_v<P, TwoSamplePermuter>) {
          size = permuter.pooled_size();
        } else {
          size = permuter.size();
        }
        result.observed = permuter.observed();
        parallel_for(cfg.permutations, cfg.threads, [&](std::int64_t b) {
          std::vector<Index> order(static_cast<std::size_t>(size));
          std::iota(order.begin(), order.end(), Index{0});
          std::mt19937_64 engine(derive_seed(cfg.seed, {static_cast<std::uint64_t>(b)}));
          std::shuffle(order.begin(), order.end(), engine);
          result.null_sample[static_cast<std::size_t>(b)] = permuter.evaluate(order);
        });
      },
      prepared.permuter);

  const auto exceed = std::count_if(result.null_sample.begin(), result.null_sample.end(),
                                    [&](double v) { return v >= result.observed; });
  result.p_value =
      (1.0 + static_cast<double>(exceed)) / (static_cast<double>(cfg.permutations) + 1.0);
  result.threshold = null_quantile(result.null_sample, result.observed, cfg.alpha);
  result.reject = result.observed > result.threshold;
  return result;
}

PermutationResult permutation_test(const DataMatrix& x, const DataMatrix& y,
                                   const StatisticKind& kind, const PermutationConfig& cfg) {
  cfg.validate();
  SampleGeometry geometry(x, y, cfg.mode);
  return run_permutations(prepare_statistic(kind, geometry), cfg);
}

}  // namespace hdpower
