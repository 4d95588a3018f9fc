#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <vector>

namespace hdpower {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x d sample matrix; each row is one observation.
///
/// Construction validates the shape (n >= 1, d >= 1) and that every entry is
/// finite, so downstream code never re-checks. Rows are stored contiguously,
/// which keeps the pairwise loops in the kernel code cache friendly.
class DataMatrix {
 public:
  explicit DataMatrix(RowMatrix values);

  /// Convenience for small literal data sets, mostly in tests.
  static DataMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// One-dimensional sample.
  static DataMatrix column(std::span<const double> values);
  static DataMatrix column(std::initializer_list<double> values);

  Index n() const noexcept { return values_.rows(); }
  Index d() const noexcept { return values_.cols(); }
  const RowMatrix& values() const noexcept { return values_; }

  std::span<const double> row(Index i) const noexcept {
    return {values_.data() + i * values_.cols(), static_cast<std::size_t>(values_.cols())};
  }

  DataMatrix select_rows(std::span<const Index> rows) const;
  /// Columns [first, first + count).
  DataMatrix columns(Index first, Index count) const;

  /// Rows of `top` followed by rows of `bottom`; dimensions must agree.
  static DataMatrix stack(const DataMatrix& top, const DataMatrix& bottom);

  friend bool operator==(const DataMatrix& a, const DataMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  RowMatrix values_;
};

/// Throws InputError unless both matrices have the same column count.
void require_same_dimension(const DataMatrix& x, const DataMatrix& y);

/// Throws PairingError unless both matrices have the same row count.
void require_paired(const DataMatrix& x, const DataMatrix& y);

}  // namespace hdpower
