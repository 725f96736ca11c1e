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

#include "teamprec/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "teamprec/errors.hpp"

namespace teamprec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::StatsOutOfRange: return "StatsOutOfRange";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::NegativePower: return "NegativePower";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorKind::InvalidGeometry: return "InvalidGeometry";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace linalg {
namespace {

void check_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

void check_rcond(double rcond, const char* who) {
  if (!(rcond >= 1.0 / kMaxConditionNumber)) {
    std::ostringstream os;
    os << who << ": condition number estimate " << (rcond > 0 ? 1.0 / rcond : INFINITY)
       << " exceeds " << kMaxConditionNumber;
    throw Error(ErrorKind::SingularMatrix, os.str());
  }
}

double lu_rcond(const Eigen::PartialPivLU<CMatrix>& lu) {
  const RVector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double top = pivots.maxCoeff();
  if (!(top > 0.0)) return 0.0;
  return std::min(lu.rcond(), pivots.minCoeff() / top);
}

}  // namespace

CMatrix solve(const CMatrix& a, const CMatrix& b) {
  check_square(a, "solve");
  require(a.rows() == b.rows(), "solve: dimension mismatch");
  if (a.rows() == 0) return CMatrix(0, b.cols());
  Eigen::PartialPivLU<CMatrix> lu(a);
  check_rcond(lu_rcond(lu), "solve");
  return lu.solve(b);
}

CMatrix solve_hpd(const CMatrix& a, const CMatrix& b) {
  check_square(a, "solve_hpd");
  require(a.rows() == b.rows(), "solve_hpd: dimension mismatch");
  if (a.rows() == 0) return CMatrix(0, b.cols());
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularMatrix, "solve_hpd: matrix is not positive definite");
  }
  check_rcond(llt.rcond(), "solve_hpd");
  return llt.solve(b);
}

CMatrix inverse(const CMatrix& a) {
  check_square(a, "inverse");
  return solve(a, CMatrix::Identity(a.rows(), a.cols()));
}

CMatrix woodbury_inverse(const CMatrix& a, const CMatrix& b, const CMatrix& d, const CMatrix& c) {
  check_square(a, "woodbury_inverse(A)");
  check_square(d, "woodbury_inverse(D)");
  const auto n = a.rows();
  const auto m = d.rows();
  require(b.rows() == n && b.cols() == m, "woodbury_inverse: B must be n x m");
  require(c.rows() == m && c.cols() == n, "woodbury_inverse: C must be m x n");

  Eigen::PartialPivLU<CMatrix> a_lu(a);
  check_rcond(lu_rcond(a_lu), "woodbury_inverse(A)");
  const CMatrix a_inv = a_lu.inverse();
  const CMatrix d_inv = inverse(d);
  const CMatrix a_inv_b = a_inv * b;
  const CMatrix capacitance = d_inv + c * a_inv_b;
  return a_inv - a_inv_b * solve(capacitance, c * a_inv);
}

CMatrix push_through(const CMatrix& b, const CMatrix& a) {
  require(a.rows() == b.cols() && a.cols() == b.rows(), "push_through: A must be n x m for B m x n");
  const auto n = a.rows();
  const CMatrix core = CMatrix::Identity(n, n) + a * b;
  // B (I + AB)^{-1} = ((I + AB)^{-H} B^H)^H
  return solve(core.adjoint(), b.adjoint()).adjoint();
}

double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool all_finite(const CMatrix& a) {
  return a.allFinite();
}

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  if (scale == 0.0) return true;
  return max_abs(a - a.adjoint()) <= rel_tol * scale;
}

CMatrix hermitian_part(const CMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

PsdReport psd_check(const CMatrix& a, bool upper_strict) {
  check_square(a, "psd_check");
  if (!is_hermitian(a)) {
    throw Error(ErrorKind::NotHermitian, "psd_check: input is not Hermitian");
  }
  PsdReport report;
  if (a.rows() == 0) {
    report.pass = true;
    return report;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(a), Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  report.max_eigenvalue = eig.eigenvalues().maxCoeff();
  report.pass = report.min_eigenvalue >= -1e-9 && (!upper_strict || report.max_eigenvalue <= 1.0 - 1e-9);
  return report;
}

CMatrix inverse_sqrt_hpd(const CMatrix& a) {
  check_square(a, "inverse_sqrt_hpd");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(a));
  const RVector& lambda = eig.eigenvalues();
  if (lambda.size() > 0 && !(lambda.minCoeff() > 0.0)) {
    throw Error(ErrorKind::SingularMatrix, "inverse_sqrt_hpd: matrix is not positive definite");
  }
  const RVector scale = lambda.array().rsqrt();
  return eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace linalg
}  // namespace teamprec
