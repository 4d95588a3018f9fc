#include "hdpower/statistics.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <string>

namespace hdpower {

namespace {

void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols()) throw InputError(std::string(what) + " must be square");
}

void require_same_size(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_square(a, "centered matrix");
  require_square(b, "centered matrix");
  if (a.rows() != b.rows()) throw PairingError("centered matrices differ in size");
}

void check_gram_shapes(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                       const Eigen::MatrixXd& kxy) {
  require_square(kxx, "within-X matrix");
  require_square(kyy, "within-Y matrix");
  if (kxy.rows() != kxx.rows() || kxy.cols() != kyy.rows()) {
    throw InputError("cross matrix shape does not match the within-group matrices");
  }
  if (kxx.rows() < 1 || kyy.rows() < 1) throw InsufficientSampleError("empty sample");
}

Eigen::MatrixXd own_distances(const DataMatrix& x, DistanceMetric metric) {
  return distance_matrix(x, metric);
}

}  // namespace

bool is_two_sample(Statistic s) {
  return s == Statistic::MMD2Biased || s == Statistic::MMD2Unbiased ||
         s == Statistic::EnergyTwoSample;
}

bool uses_kernel(Statistic s) {
  return s == Statistic::MMD2Biased || s == Statistic::MMD2Unbiased || s == Statistic::HSIC;
}

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::MMD2Biased: return "mmd2b";
    case Statistic::MMD2Unbiased: return "mmd2u";
    case Statistic::EnergyTwoSample: return "energy";
    case Statistic::DCov2: return "dcov2";
    case Statistic::DCor2: return "dcor2";
    case Statistic::UDCor2: return "udcor2";
    case Statistic::HSIC: return "hsic";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view text) {
  text = trim(text);
  for (auto s : {Statistic::MMD2Biased, Statistic::MMD2Unbiased, Statistic::EnergyTwoSample,
                 Statistic::DCov2, Statistic::DCor2, Statistic::UDCor2, Statistic::HSIC}) {
    if (text == to_string(s)) return s;
  }
  throw InputError("unknown statistic '" + std::string(text) +
                   "' (expected mmd2b, mmd2u, energy, dcov2, dcor2, udcor2 or hsic)");
}

double mmd2_biased(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                   const Eigen::MatrixXd& kxy) {
  check_gram_shapes(kxx, kyy, kxy);
  const double n = static_cast<double>(kxx.rows());
  const double m = static_cast<double>(kyy.rows());
  const double value = kxx.sum() / (n * n) + kyy.sum() / (m * m) - 2.0 * kxy.sum() / (n * m);
  return std::max(value, 0.0);
}

double mmd2_unbiased(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                     const Eigen::MatrixXd& kxy) {
  check_gram_shapes(kxx, kyy, kxy);
  if (kxx.rows() < 2 || kyy.rows() < 2) {
    throw InsufficientSampleError("unbiased MMD needs at least two points per sample");
  }
  const double n = static_cast<double>(kxx.rows());
  const double m = static_cast<double>(kyy.rows());
  const double within_x = (kxx.sum() - kxx.trace()) / (n * (n - 1.0));
  const double within_y = (kyy.sum() - kyy.trace()) / (m * (m - 1.0));
  return within_x + within_y - 2.0 * kxy.sum() / (n * m);
}

double energy_two_sample(const Eigen::MatrixXd& dxx, const Eigen::MatrixXd& dyy,
                         const Eigen::MatrixXd& dxy) {
  check_gram_shapes(dxx, dyy, dxy);
  const double n = static_cast<double>(dxx.rows());
  const double m = static_cast<double>(dyy.rows());
  return 2.0 * dxy.sum() / (n * m) - dxx.sum() / (n * n) - dyy.sum() / (m * m);
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& a) {
  require_square(a, "matrix to center");
  const Eigen::VectorXd row_means = a.rowwise().mean();
  const Eigen::RowVectorXd col_means = a.colwise().mean();
  const double grand = a.mean();
  Eigen::MatrixXd out = a;
  out.colwise() -= row_means;
  out.rowwise() -= col_means;
  out.array() += grand;
  return out;
}

Eigen::MatrixXd u_center(const Eigen::MatrixXd& a) {
  require_square(a, "matrix to U-center");
  const Index n = a.rows();
  if (n < 4) throw InsufficientSampleError("U-centering needs n >= 4");
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd row = a.rowwise().sum() / (nd - 2.0);
  const Eigen::RowVectorXd col = a.colwise().sum() / (nd - 2.0);
  const double grand = a.sum() / ((nd - 1.0) * (nd - 2.0));
  Eigen::MatrixXd out = a;
  out.colwise() -= row;
  out.rowwise() -= col;
  out.array() += grand;
  out.diagonal().setZero();
  return out;
}

double centered_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_size(a, b);
  const double n = static_cast<double>(a.rows());
  return double_center(a).cwiseProduct(double_center(b)).sum() / (n * n);
}

double u_centered_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_size(a, b);
  const double n = static_cast<double>(a.rows());
  return u_center(a).cwiseProduct(u_center(b)).sum() / (n * (n - 3.0));
}

double mmd2_biased(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec) {
  require_same_dimension(x, y);
  return mmd2_biased(gram_matrix(x, spec), gram_matrix(y, spec), gram_matrix(x, y, spec));
}

double mmd2_unbiased(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec) {
  require_same_dimension(x, y);
  if (x.n() < 2 || y.n() < 2) {
    throw InsufficientSampleError("unbiased MMD needs at least two points per sample");
  }
  return mmd2_unbiased(gram_matrix(x, spec), gram_matrix(y, spec), gram_matrix(x, y, spec));
}

double energy_two_sample(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  require_same_dimension(x, y);
  return energy_two_sample(distance_matrix(x, metric), distance_matrix(y, metric),
                           distance_matrix(x, y, metric));
}

double dcov2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  require_paired(x, y);
  if (x.n() < 2) throw InsufficientSampleError("distance covariance needs n >= 2");
  return centered_product(own_distances(x, metric), own_distances(y, metric));
}

double dcor2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  require_paired(x, y);
  if (x.n() < 2) throw InsufficientSampleError("distance correlation needs n >= 2");
  const Eigen::MatrixXd a = double_center(own_distances(x, metric));
  const Eigen::MatrixXd b = double_center(own_distances(y, metric));
  const double xx = a.cwiseProduct(a).sum();
  const double yy = b.cwiseProduct(b).sum();
  if (!(xx > 0.0) || !(yy > 0.0)) {
    throw DegenerateDataError("distance correlation undefined: a sample is constant");
  }
  return a.cwiseProduct(b).sum() / std::sqrt(xx * yy);
}

double udcov2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  require_paired(x, y);
  if (x.n() < 4) throw InsufficientSampleError("unbiased distance covariance needs n >= 4");
  return u_centered_product(own_distances(x, metric), own_distances(y, metric));
}

double udcor2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  require_paired(x, y);
  if (x.n() < 4) throw InsufficientSampleError("unbiased distance correlation needs n >= 4");
  const Eigen::MatrixXd a = u_center(own_distances(x, metric));
  const Eigen::MatrixXd b = u_center(own_distances(y, metric));
  const double xx = a.cwiseProduct(a).sum();
  const double yy = b.cwiseProduct(b).sum();
  if (!(xx > 0.0) || !(yy > 0.0)) {
    throw DegenerateDataError("unbiased distance correlation undefined: non-positive denominator");
  }
  return a.cwiseProduct(b).sum() / std::sqrt(xx * yy);
}

double hsic(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec_x,
            const KernelSpec& spec_y) {
  require_paired(x, y);
  if (x.n() < 2) throw InsufficientSampleError("HSIC needs n >= 2");
  return centered_product(gram_matrix(x, spec_x), gram_matrix(y, spec_y));
}

StatisticValue compute_statistic(const StatisticKind& kind, const DataMatrix& x,
                                 const DataMatrix& y) {
  StatisticValue out;
  out.kind = kind;
  out.n = x.n();
  out.m = y.n();
  out.gamma_x = out.gamma_y = std::numeric_limits<double>::quiet_NaN();
  switch (kind.statistic) {
    case Statistic::MMD2Biased:
    case Statistic::MMD2Unbiased: {
      require_same_dimension(x, y);
      const double gamma = resolve_bandwidth(kind.bandwidth, DataMatrix::stack(x, y));
      const KernelSpec spec{kind.kernel, gamma};
      out.gamma_x = out.gamma_y = gamma;
      out.value = kind.statistic == Statistic::MMD2Biased ? mmd2_biased(x, y, spec)
                                                          : mmd2_unbiased(x, y, spec);
      break;
    }
    case Statistic::EnergyTwoSample:
      out.value = energy_two_sample(x, y, kind.metric);
      break;
    case Statistic::DCov2:
      out.value = dcov2(x, y, kind.metric);
      break;
    case Statistic::DCor2:
      out.value = dcor2(x, y, kind.metric);
      break;
    case Statistic::UDCor2:
      out.value = udcor2(x, y, kind.metric);
      break;
    case Statistic::HSIC: {
      require_paired(x, y);
      out.gamma_x = resolve_bandwidth(kind.bandwidth, x);
      out.gamma_y = resolve_bandwidth(kind.bandwidth, y);
      out.value = hsic(x, y, KernelSpec{kind.kernel, out.gamma_x}, KernelSpec{kind.kernel, out.gamma_y});
      break;
    }
  }
  return out;
}

double mmd_estimation_bound(double kernel_max, Index n, Index m, double delta) {
  if (!(kernel_max >= 0.0) || !std::isfinite(kernel_max)) {
    throw InputError("kernel bound K must be a finite non-negative number");
  }
  if (n < 1 || m < 1) throw InputError("sample sizes must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InputError("confidence parameter delta must lie in (0, 1), got " + format_double(delta));
  }
  const double spread = std::sqrt(kernel_max / static_cast<double>(n)) +
                        std::sqrt(kernel_max / static_cast<double>(m));
  return 2.0 * spread * (1.0 + std::log(2.0 / delta));
}

namespace {

constexpr Index kTile = 512;

// Vectorizable exp(x) for x <= 0: range reduction x = n ln2 + r with
// |r| <= ln2/2, a Taylor polynomial in r, and 2^n assembled from the exponent
// bits. Arguments are clamped where exp underflows to (near) zero.
inline double exp_nonpositive(double x) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 0.6931471803691238;
  constexpr double kLn2Lo = 1.9082149292705877e-10;
  constexpr double kRound = 6755399441055744.0;  // 1.5 * 2^52
  x = x < -700.0 ? -700.0 : x;
  const double shifted = x * kLog2e + kRound;
  const double n = shifted - kRound;
  const double r = (x - n * kLn2Hi) - n * kLn2Lo;
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  // The low mantissa bits of `shifted` hold n in two's complement.
  const std::uint64_t k =
      std::bit_cast<std::uint64_t>(shifted) - std::bit_cast<std::uint64_t>(kRound);
  return p * std::bit_cast<double>((k + 1023) << 52);
}

inline float exp_nonpositive(float x) {
  constexpr float kLog2e = 1.44269504f;
  constexpr float kLn2Hi = 0.693359375f;
  constexpr float kLn2Lo = -2.12194440e-4f;
  constexpr float kRound = 12582912.0f;  // 1.5 * 2^23
  x = x < -87.0f ? -87.0f : x;
  const float shifted = x * kLog2e + kRound;
  const float n = shifted - kRound;
  const float r = (x - n * kLn2Hi) - n * kLn2Lo;
  float p = 1.0f / 5040.0f;
  p = p * r + 1.0f / 720.0f;
  p = p * r + 1.0f / 120.0f;
  p = p * r + 1.0f / 24.0f;
  p = p * r + 1.0f / 6.0f;
  p = p * r + 0.5f;
  p = p * r + 1.0f;
  p = p * r + 1.0f;
  const std::uint32_t k =
      std::bit_cast<std::uint32_t>(shifted) - std::bit_cast<std::uint32_t>(kRound);
  return p * std::bit_cast<float>((k + 127u) << 23);
}

// Squared L2 distances are accumulated coordinate by coordinate up to this
// dimension; above it a GEMM computes the inner products. L1 is always direct.
constexpr Index kDirectMaxDim = 4;

template <class T>
using RowMatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct StreamSample {
  RowMatrixT<T> values;
  VectorT<T> norms;
};

// Replaces native distances by kernel values exp(scale * q) and returns their sum.
template <class T>
double kernel_column_sum(T* v, Index size, T scale) {
  for (Index t = 0; t < size; ++t) {
    const T q = v[t] > T(0) ? v[t] : T(0);
    v[t] = exp_nonpositive(q * scale);
  }
  // A float column of at most kTile values is summed in float; tiles and
  // totals accumulate in double.
  return static_cast<double>(Eigen::Map<const VectorT<T>>(v, size).sum());
}

// Sum of k(a_i, b_j) over a tile, optionally skipping i == j (diagonal tiles).
// Work proceeds one column at a time so the buffer stays in L1.
template <class T>
double tile_sum(const StreamSample<T>& a, Index a0, Index na, const StreamSample<T>& b, Index b0,
                Index nb, const KernelSpec& spec, bool skip_diagonal) {
  const Index d = a.values.cols();
  const bool gaussian = spec.family == KernelFamily::Gaussian;
  const T scale = static_cast<T>(gaussian ? -1.0 / (spec.bandwidth * spec.bandwidth)
                                          : -1.0 / spec.bandwidth);
  VectorT<T> column(na);
  T* out = column.data();
  double total = 0.0;
  if (!gaussian || d <= kDirectMaxDim) {
    // Column-major copy of the a-block so the inner loop runs over contiguous i.
    const MatrixT<T> at = a.values.middleRows(a0, na);
    for (Index j = 0; j < nb; ++j) {
      std::fill(out, out + na, T(0));
      for (Index k = 0; k < d; ++k) {
        const T bjk = b.values(b0 + j, k);
        const T* col = at.data() + k * na;
        if (gaussian) {
          for (Index i = 0; i < na; ++i) {
            const T diff = col[i] - bjk;
            out[i] += diff * diff;
          }
        } else {
          for (Index i = 0; i < na; ++i) out[i] += std::abs(col[i] - bjk);
        }
      }
      total += kernel_column_sum(out, na, scale);
      if (skip_diagonal) total -= static_cast<double>(out[j]);
    }
    return total;
  }
  const MatrixT<T> inner = a.values.middleRows(a0, na) * b.values.middleRows(b0, nb).transpose();
  const T* an = a.norms.data() + a0;
  for (Index j = 0; j < nb; ++j) {
    const T bj = b.norms[b0 + j];
    const T* g = inner.data() + j * na;
    for (Index i = 0; i < na; ++i) out[i] = an[i] + bj - T(2) * g[i];
    total += kernel_column_sum(out, na, scale);
    if (skip_diagonal) total -= static_cast<double>(out[j]);
  }
  return total;
}

template <class T>
double within_sum(const StreamSample<T>& a, const KernelSpec& spec) {
  double total = 0.0;
  const Index n = a.values.rows();
  for (Index i0 = 0; i0 < n; i0 += kTile) {
    const Index ni = std::min(kTile, n - i0);
    total += tile_sum(a, i0, ni, a, i0, ni, spec, true);
    for (Index j0 = i0 + kTile; j0 < n; j0 += kTile) {
      const Index nj = std::min(kTile, n - j0);
      total += 2.0 * tile_sum(a, i0, ni, a, j0, nj, spec, false);
    }
  }
  return total;
}

template <class T>
double cross_sum(const StreamSample<T>& a, const StreamSample<T>& b, const KernelSpec& spec) {
  double total = 0.0;
  for (Index i0 = 0; i0 < a.values.rows(); i0 += kTile) {
    const Index ni = std::min(kTile, a.values.rows() - i0);
    for (Index j0 = 0; j0 < b.values.rows(); j0 += kTile) {
      const Index nj = std::min(kTile, b.values.rows() - j0);
      total += tile_sum(a, i0, ni, b, j0, nj, spec, false);
    }
  }
  return total;
}

template <class T>
StreamSample<T> stream_sample(const RowMatrix& values, const Eigen::RowVectorXd& center) {
  StreamSample<T> out;
  out.values = (values.rowwise() - center).template cast<T>();
  out.norms = out.values.rowwise().squaredNorm();
  return out;
}

template <class T>
double streaming_value(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec) {
  // Kernels are translation invariant; centering keeps the norms in the GEMM
  // path small, which limits cancellation.
  const double n = static_cast<double>(x.n());
  const double m = static_cast<double>(y.n());
  const Eigen::RowVectorXd center =
      (x.values().colwise().sum() + y.values().colwise().sum()) / (n + m);
  const auto xs = stream_sample<T>(x.values(), center);
  const auto ys = stream_sample<T>(y.values(), center);
  return within_sum(xs, spec) / (n * (n - 1.0)) + within_sum(ys, spec) / (m * (m - 1.0)) -
         2.0 * cross_sum(xs, ys, spec) / (n * m);
}

}  // namespace

double mmd2_unbiased_streaming(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec,
                               Precision precision) {
  spec.validate();
  require_same_dimension(x, y);
  if (x.n() < 2 || y.n() < 2) {
    throw InsufficientSampleError("unbiased MMD needs at least two points per sample");
  }
  return precision == Precision::Double ? streaming_value<double>(x, y, spec)
                                        : streaming_value<float>(x, y, spec);
}

}  // namespace hdpower
