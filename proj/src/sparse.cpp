#include "afem/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "afem/error.hpp"

namespace afem {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size();) {
    const auto& e = entries[k];
    if (e.row >= rows || e.col >= cols) {
      throw Error(ErrorCode::kInvalidArgument, "triplet outside matrix bounds");
    }
    double v = 0.0;
    std::size_t j = k;
    while (j < entries.size() && entries[j].row == e.row && entries[j].col == e.col) {
      v += entries[j].value;
      ++j;
    }
    col_idx_.push_back(e.col);
    values_.push_back(v);
    ++row_ptr_[e.row + 1];
    k = j;
  }
  for (std::size_t i = 0; i < rows; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

double SparseMatrix::asymmetry() const {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t j = col_idx_[k];
      scale = std::max(scale, std::abs(values_[k]));
      const double t = j < rows_ && i < cols_ ? at(j, i) : 0.0;
      diff = std::max(diff, std::abs(values_[k] - t));
    }
  }
  return scale > 0.0 ? diff / scale : 0.0;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace afem
