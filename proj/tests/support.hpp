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

#ifndef TEAMPREC_TESTS_SUPPORT_HPP
#define TEAMPREC_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>

#include "teamprec/channel.hpp"
#include "teamprec/linalg.hpp"

namespace teamprec::testing {

inline CMatrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {n(gen), n(gen)};
  return m;
}

/// Random Hermitian positive definite matrix with eigenvalues >= floor.
inline CMatrix random_hpd(std::mt19937_64& gen, Eigen::Index n, double floor = 1.0) {
  const CMatrix a = random_matrix(gen, n, n);
  CMatrix m = a * a.adjoint();
  m.diagonal().array() += floor;
  return m;
}

/// Random Hermitian matrix with spectrum inside [0, top].
inline CMatrix random_contraction(std::mt19937_64& gen, Eigen::Index n, double top = 0.6) {
  std::uniform_real_distribution<double> u(0.0, top);
  const Eigen::HouseholderQR<CMatrix> qr(random_matrix(gen, n, n));
  const CMatrix q = qr.householderQ();
  RVector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda(i) = u(gen);
  return q * lambda.cast<cplx>().asDiagonal() * q.adjoint();
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Hand-built draw with perfect CSIT.
inline ChannelDraw perfect_draw(const std::vector<CMatrix>& H) {
  ChannelDraw d;
  for (const auto& h : H) {
    TxChannel tx;
    tx.Hhat = h;
    tx.H = h;
    tx.E = CMatrix::Zero(h.rows(), h.cols());
    tx.Sigma = CMatrix::Zero(h.cols(), h.cols());
    d.tx.push_back(tx);
  }
  return d;
}

/// Small radio-stripe scenario for quick tests.
inline NetworkScenario small_stripe(int L, int N, int K, std::uint64_t seed, double kappa = 0.0, double epsilon = 0.0) {
  RadioStripeParams p;
  p.L = L;
  p.N = N;
  p.K = K;
  p.kappa = kappa;
  p.epsilon = epsilon;
  return build_radio_stripe_scenario(p, seed);
}

}  // namespace teamprec::testing

#endif  // TEAMPREC_TESTS_SUPPORT_HPP
