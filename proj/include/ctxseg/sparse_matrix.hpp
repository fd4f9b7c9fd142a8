// Copyright 2026 The ctxseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "ctxseg/common.hpp"

namespace ctxseg {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Compressed sparse row matrix with sorted column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {}

  enum class Duplicates { kSum, kMax, kLast };

  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets,
                                    Duplicates dup = Duplicates::kSum) {
    for (const auto& t : triplets) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
        throw Error("sparse triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ") outside " +
                    std::to_string(rows) + "x" + std::to_string(cols));
      }
    }
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    SparseMatrix m(rows, cols);
    m.col_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const auto& t = triplets[k];
      if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
        double& v = m.values_.back();
        switch (dup) {
          case Duplicates::kSum:
            v += t.value;
            break;
          case Duplicates::kMax:
            v = std::max(v, t.value);
            break;
          case Duplicates::kLast:
            v = t.value;
            break;
        }
        continue;
      }
      m.col_idx_.push_back(t.col);
      m.values_.push_back(t.value);
      ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    }
    for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  // Rows given as (sorted column, value) lists.
  static SparseMatrix from_rows(int rows, int cols, const std::vector<std::vector<std::pair<int, double>>>& data) {
    SparseMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (const auto& [c, v] : data[r]) {
        m.col_idx_.push_back(c);
        m.values_.push_back(v);
      }
      m.row_ptr_[r + 1] = static_cast<int>(m.col_idx_.size());
    }
    return m;
  }

  [[nodiscard]] int rows() const noexcept { return rows_; }
  [[nodiscard]] int cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

  [[nodiscard]] std::span<const int> row_cols(int r) const {
    return {col_idx_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  [[nodiscard]] std::span<const double> row_values(int r) const {
    return {values_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  [[nodiscard]] std::size_t row_nnz(int r) const { return static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r]); }

  [[nodiscard]] double at(int r, int c) const {
    const auto cols = row_cols(r);
    const auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
  }

  [[nodiscard]] std::vector<double> row_sums() const {
    std::vector<double> s(static_cast<std::size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      for (const double v : row_values(r)) s[r] += v;
    }
    return s;
  }

  [[nodiscard]] double max_value() const {
    double m = 0.0;
    for (const double v : values_) m = std::max(m, v);
    return m;
  }

  [[nodiscard]] SparseMatrix transpose() const {
    SparseMatrix t(cols_, rows_);
    for (const int c : col_idx_) ++t.row_ptr_[static_cast<std::size_t>(c) + 1];
    for (int r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
    t.col_idx_.resize(col_idx_.size());
    t.values_.resize(values_.size());
    std::vector<int> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (int r = 0; r < rows_; ++r) {
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const int dst = fill[col_idx_[k]]++;
        t.col_idx_[dst] = r;
        t.values_[dst] = values_[k];
      }
    }
    return t;
  }

  [[nodiscard]] std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (int r = 0; r < rows_; ++r) {
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
    }
    return out;
  }

  // Row-major dense copy; intended for small matrices in tests and oracles.
  [[nodiscard]] std::vector<double> to_dense() const {
    std::vector<double> d(static_cast<std::size_t>(rows_) * cols_, 0.0);
    for (int r = 0; r < rows_; ++r) {
      for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        d[static_cast<std::size_t>(r) * cols_ + col_idx_[k]] = values_[k];
      }
    }
    return d;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_ = {0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

}  // namespace ctxseg
