// SPDX-License-Identifier: Apache-2.0
//
// teamprec: team MMSE precoding for cell-free massive MIMO
// Copyright (C) 2026 The teamprec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TEAMPREC_ACCUMULATE_HPP
#define TEAMPREC_ACCUMULATE_HPP

#include <cmath>
#include <cstddef>

#include "teamprec/linalg.hpp"

namespace teamprec {

/// Running sums of a matrix-valued sample: mean and per-entry standard error.
class MatrixMoments {
 public:
  MatrixMoments() = default;
  MatrixMoments(Eigen::Index rows, Eigen::Index cols)
      : sum_(CMatrix::Zero(rows, cols)), sum_abs2_(RMatrix::Zero(rows, cols)) {}

  void add(const CMatrix& sample) {
    sum_ += sample;
    sum_abs2_ += sample.cwiseAbs2();
    ++count_;
  }

  void merge(const MatrixMoments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    sum_ += other.sum_;
    sum_abs2_ += other.sum_abs2_;
    count_ += other.count_;
  }

  std::size_t count() const { return count_; }

  CMatrix mean() const { return sum_ / static_cast<double>(count_); }

  /// Standard error of the mean, entrywise (unbiased sample variance).
  RMatrix standard_error() const {
    const double n = static_cast<double>(count_);
    if (count_ < 2) return RMatrix::Zero(sum_.rows(), sum_.cols());
    const RMatrix var = ((sum_abs2_ / n) - (sum_ / n).cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0));
    return (var / n).cwiseSqrt();
  }

 private:
  CMatrix sum_;
  RMatrix sum_abs2_;
  std::size_t count_ = 0;
};

}  // namespace teamprec

#endif  // TEAMPREC_ACCUMULATE_HPP
