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

#ifndef TEAMPREC_LINALG_HPP
#define TEAMPREC_LINALG_HPP

#include <Eigen/Dense>
#include <complex>

namespace teamprec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace linalg {

/// Inputs whose estimated condition number exceeds this are refused.
inline constexpr double kMaxConditionNumber = 1e12;

/// Relative tolerance used when deciding whether a matrix is Hermitian.
inline constexpr double kHermitianTolerance = 1e-12;

/// Solves A X = B with partial-pivot LU. Throws SingularMatrix when the
/// reciprocal condition estimate of A is below 1 / kMaxConditionNumber.
CMatrix solve(const CMatrix& a, const CMatrix& b);

/// Solves A X = B for Hermitian positive definite A (Cholesky). Throws
/// SingularMatrix when A is not numerically positive definite or is too
/// badly conditioned.
CMatrix solve_hpd(const CMatrix& a, const CMatrix& b);

CMatrix inverse(const CMatrix& a);

/// (A + B D C)^{-1} = A^{-1} - A^{-1} B (D^{-1} + C A^{-1} B)^{-1} C A^{-1}.
/// Evaluated with factorizations of A, D and the m x m capacitance matrix.
CMatrix woodbury_inverse(const CMatrix& a, const CMatrix& b, const CMatrix& d, const CMatrix& c);

/// B (I + A B)^{-1}, which equals (I + B A)^{-1} B.
CMatrix push_through(const CMatrix& b, const CMatrix& a);

struct PsdReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool pass = false;
};

/// Eigenvalue interval of a Hermitian matrix. Passes iff the smallest
/// eigenvalue is >= -1e-9 and, when upper_strict is set, the largest is
/// <= 1 - 1e-9. Throws NotHermitian for non-Hermitian input.
PsdReport psd_check(const CMatrix& a, bool upper_strict);

bool is_hermitian(const CMatrix& a, double rel_tol = kHermitianTolerance);

/// (A + A^H) / 2
CMatrix hermitian_part(const CMatrix& a);

/// Hermitian positive definite inverse square root A^{-1/2} via eigendecomposition.
CMatrix inverse_sqrt_hpd(const CMatrix& a);

bool all_finite(const CMatrix& a);

double max_abs(const CMatrix& a);

}  // namespace linalg
}  // namespace teamprec

#endif  // TEAMPREC_LINALG_HPP
