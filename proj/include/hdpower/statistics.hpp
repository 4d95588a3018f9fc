#pragma once

#include "hdpower/data_matrix.hpp"
#include "hdpower/kernels.hpp"

#include <string>
#include <string_view>

namespace hdpower {

enum class Statistic { MMD2Biased, MMD2Unbiased, EnergyTwoSample, DCov2, DCor2, UDCor2, HSIC };

/// A statistic together with its kernel or metric configuration.
///
/// Kernel statistics (MMD, HSIC) read `kernel` and `bandwidth`; the distance
/// statistics read `metric`. HSIC resolves the bandwidth rule separately on
/// the X and the Y sample.
struct StatisticKind {
  Statistic statistic = Statistic::MMD2Unbiased;
  KernelFamily kernel = KernelFamily::Gaussian;
  BandwidthRule bandwidth = MedianHeuristic{};
  DistanceMetric metric = DistanceMetric::L2;
};

bool is_two_sample(Statistic s);
bool uses_kernel(Statistic s);

/// Short names used on the command line and in CSV output:
/// mmd2b, mmd2u, energy, dcov2, dcor2, udcor2, hsic.
std::string to_string(Statistic s);
Statistic parse_statistic(std::string_view text);

struct StatisticValue {
  double value = 0.0;
  StatisticKind kind;
  Index n = 0;
  Index m = 0;
  /// Resolved bandwidth(s); NaN for distance statistics. HSIC fills both.
  double gamma_x = 0.0;
  double gamma_y = 0.0;
};

// Gram-matrix forms. Kxx is n x n, Kyy is m x m, Kxy is n x m.

/// (1/n^2) sum Kxx + (1/m^2) sum Kyy - 2/(nm) sum Kxy, clamped at zero (it is a squared norm).
double mmd2_biased(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                   const Eigen::MatrixXd& kxy);
/// Within-group sums drop the diagonal and use 1/(n(n-1)), 1/(m(m-1)).
double mmd2_unbiased(const Eigen::MatrixXd& kxx, const Eigen::MatrixXd& kyy,
                     const Eigen::MatrixXd& kxy);
/// 2/(nm) sum Dxy - (1/n^2) sum Dxx - (1/m^2) sum Dyy.
double energy_two_sample(const Eigen::MatrixXd& dxx, const Eigen::MatrixXd& dyy,
                         const Eigen::MatrixXd& dxy);

/// H A H with H = I - 11^T/n.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& a);
/// U-centering: off-diagonal A_ij - r_i/(n-2) - c_j/(n-2) + s/((n-1)(n-2)), zero diagonal. n >= 4.
Eigen::MatrixXd u_center(const Eigen::MatrixXd& a);

/// (1/n^2) sum (HAH)_ij (HBH)_ij for square matrices A, B of equal size.
double centered_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// (1/(n(n-3))) sum_{i != j} of the U-centered product.
double u_centered_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Data forms.

double mmd2_biased(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec);
double mmd2_unbiased(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec);
double energy_two_sample(const DataMatrix& x, const DataMatrix& y,
                         DistanceMetric metric = DistanceMetric::L2);

double dcov2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric = DistanceMetric::L2);
double dcor2(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric = DistanceMetric::L2);
double udcov2(const DataMatrix& x, const DataMatrix& y,
              DistanceMetric metric = DistanceMetric::L2);
double udcor2(const DataMatrix& x, const DataMatrix& y,
              DistanceMetric metric = DistanceMetric::L2);
double hsic(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec_x,
            const KernelSpec& spec_y);

/// Evaluates `kind` on (X, Y), resolving the bandwidth rule first: on the pooled
/// sample for two-sample statistics, on X and Y separately for HSIC.
StatisticValue compute_statistic(const StatisticKind& kind, const DataMatrix& x,
                                 const DataMatrix& y);

/// Deviation bound on |MMD_b^2 - MMD^2| holding with probability 1 - delta when
/// 0 <= k(x, x) <= K: 2 (sqrt(K/n) + sqrt(K/m)) (1 + log(2/delta)).
double mmd_estimation_bound(double kernel_max, Index n, Index m, double delta);

enum class Precision { Double, Single };

/// Unbiased MMD^2 for samples too large to materialize the Gram matrices.
/// Streams over tiles; memory is O(tile^2). Gaussian kernels in more than a
/// couple dozen dimensions use a GEMM for the cross inner products.
///
/// Single precision evaluates distances and kernel values in float (sums stay
/// in double); kernel values then carry about 1e-7 relative error, which is
/// negligible next to Monte Carlo noise and roughly halves the run time.
double mmd2_unbiased_streaming(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec,
                               Precision precision = Precision::Double);

}  // namespace hdpower
