#pragma once

#include "hdpower/data_matrix.hpp"
#include "hdpower/statistics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hdpower {

enum class TestMode { TwoSample, Independence };

std::string to_string(TestMode mode);

struct PermutationConfig {
  Index permutations = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  TestMode mode = TestMode::TwoSample;
  /// Worker cap for the permutation loop; results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

struct PermutationResult {
  double observed = 0.0;
  std::vector<double> null_sample;
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject = false;
  /// Bandwidths resolved once on the unpermuted data (NaN when unused).
  double gamma_x = 0.0;
  double gamma_y = 0.0;
};

/// Conservative right-tail threshold: the ceil((1 - alpha)(B + 1))-th smallest
/// value of the null sample pooled with the observed statistic.
double null_quantile(std::span<const double> null_sample, double observed, double alpha);

/// Re-evaluates a two-sample statistic under relabelings of a pooled N x N
/// kernel or distance matrix. Only O(n^2) gathers per relabeling.
class TwoSamplePermuter {
 public:
  TwoSamplePermuter(Eigen::MatrixXd pooled, Index n, Statistic statistic);

  Index pooled_size() const noexcept { return pooled_.rows(); }
  Index first_group_size() const noexcept { return n_; }

  /// `order[0, n)` index the first group, the rest the second.
  double evaluate(std::span<const Index> order) const;
  double observed() const;

 private:
  Eigen::MatrixXd pooled_;
  Eigen::VectorXd row_sums_;
  double total_ = 0.0;
  double trace_ = 0.0;
  Index n_ = 0;
  Statistic statistic_;
};

/// Re-evaluates scale * sum_ij A_ij B_{p(i) p(j)} for centered A, B while the
/// rows of Y are permuted. Centering commutes with simultaneous permutation,
/// so A and B are centered once.
class IndependencePermuter {
 public:
  IndependencePermuter(Eigen::MatrixXd a_centered, Eigen::MatrixXd b_centered, double scale);

  Index size() const noexcept { return a_.rows(); }
  double evaluate(std::span<const Index> perm) const;
  double observed() const;

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  double scale_ = 1.0;
};

using Permuter = std::variant<TwoSamplePermuter, IndependencePermuter>;

/// Lazily computed pairwise matrices of one data set, shared by every statistic
/// evaluated on it.
class SampleGeometry {
 public:
  SampleGeometry(const DataMatrix& x, const DataMatrix& y, TestMode mode);

  const DataMatrix& x() const noexcept { return x_; }
  const DataMatrix& y() const noexcept { return y_; }
  TestMode mode() const noexcept { return mode_; }

  /// Two-sample mode: matrices over the pooled rows (X first).
  const Eigen::MatrixXd& pooled_squared_l2();
  const Eigen::MatrixXd& pooled_distances(DistanceMetric metric);
  const Eigen::MatrixXd& pooled_native(KernelFamily family);

  /// Independence mode: per-sample matrices.
  const Eigen::MatrixXd& squared_l2(bool second);
  const Eigen::MatrixXd& distances(bool second, DistanceMetric metric);
  const Eigen::MatrixXd& native(bool second, KernelFamily family);

  double median_bandwidth_pooled();
  double median_bandwidth(bool second);

 private:
  const DataMatrix& x_;
  const DataMatrix& y_;
  TestMode mode_;
  std::optional<DataMatrix> pooled_;
  std::optional<Eigen::MatrixXd> pooled_sq_, pooled_l2_, pooled_l1_;
  std::optional<Eigen::MatrixXd> sq_[2], l2_[2], l1_[2];
  std::optional<double> pooled_median_, median_[2];

  const DataMatrix& pooled();
  const DataMatrix& sample(bool second) const { return second ? y_ : x_; }
};

struct PreparedStatistic {
  Permuter permuter;
  double gamma_x;
  double gamma_y;
};

/// Resolves bandwidths once on the unpermuted data and builds the permuter.
PreparedStatistic prepare_statistic(const StatisticKind& kind, SampleGeometry& geometry);

PermutationResult run_permutations(const PreparedStatistic& prepared,
                                   const PermutationConfig& cfg);

/// Full test: checks mode against statistic and data shape, prepares, permutes.
PermutationResult permutation_test(const DataMatrix& x, const DataMatrix& y,
                                   const StatisticKind& kind, const PermutationConfig& cfg);

}  // namespace hdpower
