#include "hdpower/data_matrix.hpp"

#include "hdpower/error.hpp"

#include <cmath>
#include <string>

namespace hdpower {

DataMatrix::DataMatrix(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InputError("data matrix must have at least one row and one column (got " +
                     std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()) + ")");
  }
  if (!values_.allFinite()) {
    for (Index i = 0; i < values_.rows(); ++i) {
      for (Index j = 0; j < values_.cols(); ++j) {
        if (!std::isfinite(values_(i, j))) {
          throw InputError("non-finite entry at row " + std::to_string(i) + ", column " +
                           std::to_string(j));
        }
      }
    }
  }
}

DataMatrix DataMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Index>(rows.size());
  const auto d = n == 0 ? Index{0} : static_cast<Index>(rows.begin()->size());
  RowMatrix m(n, d);
  Index i = 0;
  for (const auto& r : rows) {
    if (static_cast<Index>(r.size()) != d) throw InputError("ragged rows in data matrix literal");
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return DataMatrix(std::move(m));
}

DataMatrix DataMatrix::column(std::span<const double> values) {
  RowMatrix m(static_cast<Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Index>(i), 0) = values[i];
  return DataMatrix(std::move(m));
}

DataMatrix DataMatrix::column(std::initializer_list<double> values) {
  return column(std::span<const double>(values.begin(), values.size()));
}

DataMatrix DataMatrix::select_rows(std::span<const Index> rows) const {
  RowMatrix m(static_cast<Index>(rows.size()), d());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= n()) throw InputError("row index out of range");
    m.row(static_cast<Index>(i)) = values_.row(r);
  }
  return DataMatrix(std::move(m));
}

DataMatrix DataMatrix::columns(Index first, Index count) const {
  if (first < 0 || count < 1 || first + count > d()) {
    throw InputError("column range [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") outside dimension " + std::to_string(d()));
  }
  return DataMatrix(values_.middleCols(first, count));
}

DataMatrix DataMatrix::stack(const DataMatrix& top, const DataMatrix& bottom) {
  require_same_dimension(top, bottom);
  RowMatrix m(top.n() + bottom.n(), top.d());
  m.topRows(top.n()) = top.values_;
  m.bottomRows(bottom.n()) = bottom.values_;
  return DataMatrix(std::move(m));
}

void require_same_dimension(const DataMatrix& x, const DataMatrix& y) {
  if (x.d() != y.d()) {
    throw InputError("dimension mismatch: " + std::to_string(x.d()) + " vs " +
                     std::to_string(y.d()));
  }
}

void require_paired(const DataMatrix& x, const DataMatrix& y) {
  if (x.n() != y.n()) {
    throw PairingError("paired samples need equal row counts: " + std::to_string(x.n()) +
                       " vs " + std::to_string(y.n()));
  }
}

}  // namespace hdpower
