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

#include <random>

#include "support.hpp"
#include "teamprec/accumulate.hpp"
#include "teamprec/errors.hpp"
#include "teamprec/statistics.hpp"

using namespace teamprec;

TEST_CASE("local stage examples") {
  CHECK(local_mmse_stage(CMatrix::Zero(3, 2), CMatrix::Zero(2, 2), 5.0).norm() == 0.0);
  const CMatrix one = CMatrix::Ones(1, 1);
  CHECK(std::abs(local_mmse_stage(one, CMatrix::Zero(1, 1), 1.0)(0, 0) - 0.5) <= 1e-15);

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix h = testing::random_matrix(gen, 5, 2);
    const CMatrix sigma = 0.3 * CMatrix::Identity(2, 2);
    const double P = 7.0;
    const CMatrix F = local_mmse_stage(h, sigma, P);
    CMatrix lhs = h.adjoint() * h + sigma;
    lhs.diagonal().array() += 1.0 / P;
    CHECK((lhs * F - h.adjoint()).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(local_mmse_stage(one, CMatrix::Zero(1, 1), 0.0), Error);
}

TEST_CASE("sequential factors") {
  std::mt19937_64 gen(5);
  const CMatrix h = testing::random_matrix(gen, 4, 1);
  const CMatrix proj = h * local_mmse_stage(h, CMatrix::Zero(1, 1), 3.0);
  const SequentialFactors zero = sequential_factors(proj, CMatrix::Zero(4, 4));
  CHECK((zero.V - CMatrix::Identity(4, 4)).norm() <= 1e-14);
  CHECK((zero.Vbar - (CMatrix::Identity(4, 4) - proj)).norm() <= 1e-14);

  const CMatrix pi = testing::random_contraction(gen, 4);
  const SequentialFactors f = sequential_factors(proj, pi);
  const CMatrix I = CMatrix::Identity(4, 4);
  CHECK(((I - pi * proj) * f.V - (I - pi)).norm() <= 1e-12);
  CHECK((f.Vbar - (I - proj * f.V)).norm() <= 1e-14);
}

TEST_CASE("local Pi is diagonal for independent users") {
  const NetworkScenario s = testing::small_stripe(4, 1, 3, 2);
  const LongTermStats st = estimate_local_pi(s, 20000, 1);
  REQUIRE(st.L() == 4);
  CHECK(st.sample_count == 20000);
  CHECK(st.seed == 1);
  CHECK(st.standard_error_estimate > 0.0);
  for (int l = 0; l < 4; ++l) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j) CHECK(std::abs(st.pi[l](i, j)) <= 3.0 * st.entry_se[l](i, j));
      }
    }
  }
}

TEST_CASE("local Pi agrees with an independent estimator") {
  const NetworkScenario s = iid_scenario(2, 1, 3, 10.0);
  const LongTermStats st = estimate_local_pi(s, 20000, 4);
  const int M = 200000;
  MatrixMoments oracle(3, 3);
  for (int m = 0; m < M; ++m) {
    const TxChannel tx = draw_tx_channel(s, {99, Stream::Tuning, static_cast<std::uint64_t>(m)}, 1);
    oracle.add(tx.Hhat * local_mmse_stage(tx.Hhat, tx.Sigma, s.P));
  }
  const CMatrix ref = oracle.mean();
  const RMatrix ref_se = oracle.standard_error();
  for (int i = 0; i < 3; ++i) {
    const double se = std::hypot(st.entry_se[1](i, i), ref_se(i, i));
    CHECK(std::abs(st.pi[1](i, i) - ref(i, i)) <= 4.0 * se);
  }
}

TEST_CASE("local Pi for a deterministic channel") {
  NetworkScenario s = testing::small_stripe(2, 1, 3, 6);
  s.kappa = 1e9;
  const LongTermStats st = estimate_local_pi(s, 2000, 1);
  const TxChannel tx = draw_tx_channel(s, {1, Stream::Statistics, 0}, 0);
  const CMatrix exact = tx.Hhat * local_mmse_stage(tx.Hhat, tx.Sigma, s.P);
  CHECK(testing::rel_err(st.pi[0], exact) <= 1e-3);
  CHECK(st.entry_se[0].maxCoeff() <= 1e-3 * exact.norm());
}

TEST_CASE("unidirectional recursion boundary") {
  const NetworkScenario s = testing::small_stripe(4, 1, 3, 8);
  const LongTermStats uni = estimate_unidirectional_pi(s, 5000, 2);
  const LongTermStats loc = estimate_local_pi(s, 5000, 2);
  REQUIRE(uni.pi.size() == 5);
  CHECK(uni.L() == 4);
  CHECK(uni.pi[4].norm() == 0.0);
  CHECK(testing::rel_err(uni.pi[3], loc.pi[3]) <= 1e-12);
  CHECK(&uni.for_tx(3) == &uni.pi[4]);
  for (const auto& p : uni.pi) CHECK(linalg::psd_check(p, true).pass);
}

TEST_CASE("unidirectional with one TX") {
  const NetworkScenario s = iid_scenario(1, 1, 2, 1.0);
  const LongTermStats uni = estimate_unidirectional_pi(s, 1000, 1);
  REQUIRE(uni.pi.size() == 2);
  CHECK(uni.for_tx(0).norm() == 0.0);
}

TEST_CASE("high power projector expectation") {
  const NetworkScenario s = iid_scenario(3, 1, 4, 1e6);
  const LongTermStats uni = estimate_unidirectional_pi(s, 20000, 3);
  const CMatrix& pi = uni.pi[2];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double target = i == j ? 0.25 : 0.0;
      CHECK(std::abs(pi(i, j) - target) <= 3.0 * uni.entry_se[2](i, j) + 1e-6);
    }
  }
}

TEST_CASE("doubling the sample count is consistent") {
  const NetworkScenario s = testing::small_stripe(3, 2, 4, 12, 0.0, 0.1);
  const LongTermStats a = estimate_local_pi(s, 10000, 21);
  const LongTermStats b = estimate_local_pi(s, 20000, 77);
  int total = 0;
  int within = 0;
  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        ++total;
        if (std::abs(a.pi[l](i, j) - b.pi[l](i, j)) < 4.0 * a.entry_se[l](i, j)) ++within;
      }
    }
  }
  CHECK(within >= 0.95 * total);
}

TEST_CASE("stats are deterministic") {
  const NetworkScenario s = testing::small_stripe(3, 1, 3, 4);
  const LongTermStats a = estimate_unidirectional_pi(s, 2000, 5);
  const LongTermStats b = estimate_unidirectional_pi(s, 2000, 5);
  for (std::size_t i = 0; i < a.pi.size(); ++i) CHECK(a.pi[i] == b.pi[i]);
}

TEST_CASE("stats validation") {
  const NetworkScenario s = iid_scenario(2, 1, 3, 1.0);
  CHECK_THROWS_AS(estimate_local_pi(s, 999, 1), Error);
  CHECK_THROWS_AS(estimate_unidirectional_pi(s, 10, 1), Error);

  LongTermStats bad = make_stats(StatsScheme::Local, {CMatrix::Identity(2, 2)});
  try {
    bad.check_range();
    FAIL("expected StatsOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StatsOutOfRange);
  }
  CHECK_NOTHROW(make_stats(StatsScheme::Local, {0.5 * CMatrix::Identity(2, 2)}).check_range());
  CHECK_THROWS_AS(make_stats(StatsScheme::Unidirectional, {CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)}), Error);
}

TEST_CASE("stats json round trip") {
  const NetworkScenario s = testing::small_stripe(3, 1, 3, 9);
  const LongTermStats st = estimate_unidirectional_pi(s, 1000, 8);
  const nlohmann::json j = st;
  const LongTermStats back = j.get<LongTermStats>();
  CHECK(back.scheme == StatsScheme::Unidirectional);
  CHECK(back.sample_count == 1000);
  CHECK(back.seed == 8);
  REQUIRE(back.pi.size() == st.pi.size());
  for (std::size_t i = 0; i < st.pi.size(); ++i) {
    CHECK(back.pi[i] == st.pi[i]);
    CHECK(back.entry_se[i] == st.entry_se[i]);
  }
}
