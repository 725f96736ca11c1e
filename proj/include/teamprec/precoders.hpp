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

#ifndef TEAMPREC_PRECODERS_HPP
#define TEAMPREC_PRECODERS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teamprec/channel.hpp"
#include "teamprec/statistics.hpp"

namespace teamprec {

enum class Scheme {
  LocalTMMSE,
  UnidirectionalTMMSE,
  CentralizedRecursive,
  CentralizedDirect,
  MRT,
  OBE,
  LocalMmseLsfd,
  SGD,        // step scalars mu_k = 1
  SGDRobust,  // step scalars tuned by line search
  SequentialZF,
};

/// Which channel estimates a scheme's precoders at TX l may depend on.
enum class InfoStructure {
  Local,           // Hhat_l only
  Unidirectional,  // Hhat_1 .. Hhat_l
  Centralized,     // all estimates
};

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view tag);
const std::vector<Scheme>& all_schemes();
InfoStructure info_structure(Scheme scheme);

/// Precoding vectors t_{l,k}, stored as the LN x K matrix whose column k is
/// the stacked t_k = [t_{1,k}; ...; t_{L,k}].
struct PrecoderSet {
  Scheme scheme = Scheme::CentralizedDirect;
  int L = 0;
  int N = 0;
  CMatrix T;

  int K() const { return static_cast<int>(T.cols()); }
  /// N x K block of TX l.
  auto block(int l) const { return T.middleRows(l * N, N); }
  auto block(int l) { return T.middleRows(l * N, N); }
};

// ---------------------------------------------------------------------------
// Local CSIT

/// Coefficients C_l solving C_l + sum_{j != l} Pi_j C_j = I.
struct LocalCoefficients {
  std::vector<CMatrix> C;
};

/// Uses the block structure D + U Pi^T with D = diag(I - Pi_l): only K x K
/// factorizations are needed, C_l = (I - Pi_l)^{-1} (I + sum_j Pi_j (I - Pi_j)^{-1})^{-1}.
LocalCoefficients solve_local_coefficients(const LongTermStats& stats);

/// t_{l,k} = F_l C_l e_k
PrecoderSet local_tmmse(const ChannelDraw& draw, double P, const LocalCoefficients& coeffs);

PrecoderSet mrt(const ChannelDraw& draw);

/// Moments for the bilinear class t_{l,k} = Hhat_l^H C_l e_k and the
/// coefficients minimizing the MSE over it.
struct ObeCoefficients {
  std::vector<CMatrix> gram;           // E[Hhat_l Hhat_l^H]
  std::vector<CMatrix> weighted_gram;  // E[Hhat_l (Hhat_l^H Hhat_l + Sigma_l + I/P) Hhat_l^H]
  std::vector<CMatrix> C;
  std::size_t sample_count = 0;
};

/// Solves B_l C_l + A_l sum_{j != l} A_j C_j = A_l (A = gram, B = weighted_gram).
std::vector<CMatrix> solve_obe_coefficients(const std::vector<CMatrix>& gram, const std::vector<CMatrix>& weighted_gram);
ObeCoefficients estimate_obe_coefficients(const NetworkScenario& scenario, std::size_t samples, std::uint64_t seed);
PrecoderSet obe(const ChannelDraw& draw, const ObeCoefficients& coeffs);

/// Monte-Carlo moments of the scalar-scaled local MMSE class
/// t_{l,k} = c_{l,k} F_l e_k, per user k.
struct LsfdMoments {
  std::vector<CMatrix> cross;  // per k, L x L: E[(H_l F_l e_k)^H (H_j F_j e_k)]
  std::vector<CVector> gain;   // per k, length L: E[e_k^T H_l F_l e_k]
  RMatrix power;               // L x K: E[||F_l e_k||^2]
  std::size_t sample_count = 0;
};

LsfdMoments estimate_lsfd_moments(const NetworkScenario& scenario, std::size_t samples, std::uint64_t seed);

/// L x K coefficient table minimizing each MSE_k over the class.
CMatrix solve_lsfd_coefficients(const NetworkScenario& scenario, const LsfdMoments& moments);

PrecoderSet local_mmse_lsfd(const ChannelDraw& draw, double P, const CMatrix& coeffs);

// ---------------------------------------------------------------------------
// Unidirectional and centralized CSIT

/// t_{l,k} = F_l V_l [Vbar_{l-1} ... Vbar_1] e_k
PrecoderSet unidirectional_tmmse(const ChannelDraw& draw, double P, const LongTermStats& stats);

/// Same forward pass with Pi_l replaced by the per-draw backward recursion
/// Pbar_l = P_{l+1} V_{l+1} + Pbar_{l+1} Vbar_{l+1}, Pbar_L = 0.
PrecoderSet centralized_mmse_recursive(const ChannelDraw& draw, double P);

/// t_k = (Hhat^H Hhat + Sigma + I / P)^{-1} Hhat^H e_k
PrecoderSet centralized_mmse_direct(const ChannelDraw& draw, double P);

/// Transmitted signals x_l when the K-dimensional symbol vector u is
/// forwarded along the stripe as Vbar_{l-1} ... Vbar_1 u.
std::vector<CVector> sequential_transmit(const ChannelDraw& draw, double P, const LongTermStats& stats, const CVector& u);

/// Stage (H_l^H H_l)^{-1} H_l^H of the sequential ZF recursion.
CMatrix zf_stage(const CMatrix& Hhat_l);

/// T_{l,k} = mu_k h_l^H (e_k - sum_{j<l} h_j T_{j,k}) / ||h_l||^2, N = 1.
PrecoderSet sgd_precoder(const ChannelDraw& draw, const RVector& mu);

/// t_{l,k} = (H_l^H H_l)^{-1} H_l^H (e_k - sum_{j<l} H_j t_{j,k})
PrecoderSet sequential_zf(const ChannelDraw& draw);

inline constexpr double kSgdMuUpper = 2.0;
inline constexpr double kSgdMuTolerance = 1e-3;

/// Per-user mu_k minimizing the Monte-Carlo MSE_k by golden-section search
/// on [0, 2] (tolerance 1e-3), using `samples` draws of the tuning stream.
RVector tune_sgd_mu(const NetworkScenario& scenario, std::size_t samples, std::uint64_t seed);

/// Monte-Carlo MSE_k of the SGD scheme with the given mu over draws of the
/// tuning stream (exposed for tests).
double sgd_mse(const NetworkScenario& scenario, const std::vector<ChannelDraw>& draws, int k, double mu);

/// Sequential forward pass shared by all unidirectional-type schemes:
/// with R_0 = I, T_l = stage_l R_{l-1} (columns scaled by mu when given),
/// R_l = R_{l-1} - Hhat_l T_l.
using StageFn = std::function<CMatrix(int l, const TxChannel& tx)>;
PrecoderSet sequential_precode(const ChannelDraw& draw, Scheme scheme, const StageFn& stage, const RVector* mu);

// ---------------------------------------------------------------------------

struct StatsConfig {
  std::size_t samples = kDefaultStatsSamples;
  std::uint64_t seed = 0;
};

/// A scheme together with every long-term quantity it needs; maps a
/// (weighted) channel draw to its precoders.
struct PrecoderRule {
  Scheme scheme = Scheme::CentralizedDirect;
  double P = 1.0;
  std::optional<LongTermStats> stats;
  std::optional<LocalCoefficients> local_coeffs;
  std::optional<ObeCoefficients> obe_coeffs;
  std::optional<CMatrix> lsfd_coeffs;
  RVector mu;

  static PrecoderRule prepare(const NetworkScenario& scenario, Scheme scheme, const StatsConfig& config);

  /// `design_draw` is the draw with weights applied (see apply_weights).
  PrecoderSet apply(const ChannelDraw& design_draw) const;
};

void to_json(nlohmann::json& j, const PrecoderSet& set);

}  // namespace teamprec

#endif  // TEAMPREC_PRECODERS_HPP
