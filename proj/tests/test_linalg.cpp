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

#include <doctest.h>

#include "support.hpp"
#include "teamprec/errors.hpp"
#include "teamprec/linalg.hpp"

using namespace teamprec;
using testing::random_hpd;
using testing::random_matrix;
using testing::rel_err;

TEST_CASE("woodbury: identity case") {
  const CMatrix I2 = CMatrix::Identity(2, 2);
  const CMatrix zero = CMatrix::Zero(2, 2);
  CHECK(rel_err(linalg::woodbury_inverse(I2, zero, I2, zero), I2) == 0.0);
}

TEST_CASE("woodbury: scalar case") {
  const CMatrix two = CMatrix::Constant(1, 1, 2.0);
  const CMatrix one = CMatrix::Constant(1, 1, 1.0);
  CHECK(std::abs(linalg::woodbury_inverse(two, one, one, one)(0, 0) - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("woodbury: random 4x4 matches direct inverse") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 20; ++i) {
    const CMatrix a = random_hpd(gen, 4);
    const CMatrix b = random_matrix(gen, 4, 2);
    const CMatrix d = random_hpd(gen, 2);
    const CMatrix c = random_matrix(gen, 2, 4);
    const CMatrix direct = (a + b * d * c).inverse();
    CHECK(rel_err(linalg::woodbury_inverse(a, b, d, c), direct) <= 1e-10);
  }
}

TEST_CASE("woodbury: singular A is rejected") {
  CMatrix a = CMatrix::Identity(3, 3);
  a(2, 2) = 0.0;
  const CMatrix b = CMatrix::Identity(3, 1);
  const CMatrix d = CMatrix::Identity(1, 1);
  try {
    linalg::woodbury_inverse(a, b, d, b.adjoint());
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMatrix);
  }
}

TEST_CASE("push-through: trivial cases") {
  const CMatrix zero = CMatrix::Zero(3, 2);
  std::mt19937_64 gen(3);
  CHECK(linalg::push_through(zero, random_matrix(gen, 2, 3)).norm() == 0.0);
  const CMatrix I2 = CMatrix::Identity(2, 2);
  CHECK(rel_err(linalg::push_through(I2, I2), 0.5 * I2) <= 1e-15);
}

TEST_CASE("push-through: both sides agree on a 3x5 / 5x3 pair") {
  std::mt19937_64 gen(5);
  const CMatrix b = 0.3 * random_matrix(gen, 3, 5);
  const CMatrix a = 0.3 * random_matrix(gen, 5, 3);
  const CMatrix left = linalg::push_through(b, a);
  const CMatrix right = (CMatrix::Identity(3, 3) + b * a).inverse() * b;
  CHECK(rel_err(left, right) <= 1e-10);
}

TEST_CASE("psd_check") {
  const auto half = linalg::psd_check(0.5 * CMatrix::Identity(3, 3), true);
  CHECK(half.pass);
  CHECK(half.min_eigenvalue == doctest::Approx(0.5));
  CHECK(half.max_eigenvalue == doctest::Approx(0.5));
  CHECK_FALSE(linalg::psd_check(-CMatrix::Identity(2, 2), false).pass);
  CHECK_FALSE(linalg::psd_check(CMatrix::Identity(2, 2), true).pass);
  CHECK(linalg::psd_check(CMatrix::Identity(2, 2), false).pass);

  CMatrix skew = CMatrix::Identity(2, 2);
  skew(0, 1) = 1.0;
  try {
    linalg::psd_check(skew, false);
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotHermitian);
  }
}

TEST_CASE("solve and solve_hpd residuals") {
  std::mt19937_64 gen(8);
  const CMatrix a = random_hpd(gen, 5);
  const CMatrix b = random_matrix(gen, 5, 3);
  CHECK((a * linalg::solve(a, b) - b).norm() <= 1e-12 * b.norm() * a.norm());
  CHECK((a * linalg::solve_hpd(a, b) - b).norm() <= 1e-12 * b.norm() * a.norm());
  CHECK_THROWS_AS(linalg::solve(CMatrix::Zero(2, 2), CMatrix::Identity(2, 2)), Error);
  CHECK_THROWS_AS(linalg::solve_hpd(-CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), Error);
  CHECK_THROWS_AS(linalg::solve(CMatrix::Identity(2, 3), CMatrix::Identity(2, 2)), Error);
}

TEST_CASE("ill-conditioned inputs are refused") {
  CMatrix a = CMatrix::Identity(2, 2);
  a(1, 1) = 1e-14;
  CHECK_THROWS_AS(linalg::inverse(a), Error);
}

TEST_CASE("inverse square root") {
  std::mt19937_64 gen(9);
  const CMatrix a = random_hpd(gen, 4);
  const CMatrix s = linalg::inverse_sqrt_hpd(a);
  CHECK(rel_err(s * a * s, CMatrix::Identity(4, 4)) <= 1e-12);
  CHECK(linalg::is_hermitian(s));
}

TEST_CASE("hermitian helpers") {
  std::mt19937_64 gen(10);
  const CMatrix a = random_matrix(gen, 3, 3);
  CHECK_FALSE(linalg::is_hermitian(a));
  CHECK(linalg::is_hermitian(linalg::hermitian_part(a)));
  CHECK(linalg::all_finite(a));
  CMatrix bad = a;
  bad(0, 0) = {NAN, 0.0};
  CHECK_FALSE(linalg::all_finite(bad));
}
