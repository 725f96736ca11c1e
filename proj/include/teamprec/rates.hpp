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

#ifndef TEAMPREC_RATES_HPP
#define TEAMPREC_RATES_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamprec/channel.hpp"
#include "teamprec/precoders.hpp"

namespace teamprec {

inline constexpr std::size_t kMinEvalSamples = 1000;

/// Monte-Carlo moments of the effective gains g_j^H t_k, where g_j^H is row j
/// of the true (unweighted) channel and t_k is computed from the weighted
/// estimate. Weights enter through the formulas below.
struct MomentEstimates {
  CVector mean_gain;  // E[g_k^H t_k]
  RMatrix second;     // (j, k): E[|g_j^H t_k|^2]
  RVector power;      // E[||t_k||^2]
  RVector variance;   // unbiased V[g_k^H t_k]
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::vector<MomentEstimates> batches;

  int K() const { return static_cast<int>(mean_gain.size()); }
};

/// Moments built from the raw sums (used for batches and hand-built tests).
MomentEstimates make_moments(const CVector& mean_gain, const RMatrix& second, const RVector& power, std::size_t count);

/// Maps a weighted design draw to the LN x K precoder matrix.
using PrecodeFn = std::function<CMatrix(const ChannelDraw& design_draw)>;

MomentEstimates estimate_moments(const NetworkScenario& scenario, const PrecodeFn& precode, std::size_t samples,
                                 std::uint64_t seed);
MomentEstimates estimate_moments(const NetworkScenario& scenario, const PrecoderRule& rule, std::size_t samples,
                                 std::uint64_t seed);

/// MSE_k = sum_j w_j E|g_j^H t_k|^2 - 2 sqrt(w_k) Re E[g_k^H t_k] + 1 + E||t_k||^2 / P
RVector evaluate_mse(const MomentEstimates& m, double P, const RVector& w);

/// Per-draw MSE_k cost ||W^{1/2} H t_k - e_k||^2 + ||t_k||^2 / P, given the
/// weighted draw.
RVector draw_mse(const ChannelDraw& weighted_draw, const CMatrix& T, double P);

RVector uatf_sinr(const MomentEstimates& m, const RVector& w, double P);

struct PowerAllocation {
  RVector p;        // per-user DL power, mW
  RVector p_tilde;  // normalized powers, sum p_tilde = sum w
};

PowerAllocation dl_power_allocation(const MomentEstimates& m, const RVector& w, double P);

/// log2(1 + p_k |m_k|^2 / (p_k V_k + sum_{j != k} p_j E|g_k^H t_j|^2 + 1))
RVector hardening_rate(const MomentEstimates& m, const RVector& p);

struct RateReport {
  std::string scheme;
  RVector mse;
  RVector rate_dual;  // -log2(MSE_k)
  RVector sinr;       // UatF SINR (linear)
  RVector rate;       // hardening rate under dual power allocation
  RVector rate_se;    // batch-means standard error of log2(1 + SINR_k)
  RMatrix batch_rate; // K x batches
  RVector p;
  RVector p_tilde;
  double radiated_power = 0.0;  // sum_k p_k E||t_k||^2
  double p_sum = 0.0;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;

  int K() const { return static_cast<int>(mse.size()); }
};

/// Full evaluation chain: moments -> UatF SINR -> dual power -> hardening rate.
RateReport evaluate_rates(const std::string& scheme, const MomentEstimates& m, const NetworkScenario& scenario);

/// Standard error of rate_a - rate_b for user k from paired batch means.
double paired_rate_se(const RateReport& a, const RateReport& b, int k);

void to_json(nlohmann::json& j, const RateReport& report);
void write_rate_csv(std::ostream& os, const std::vector<RateReport>& reports, bool header = true);

}  // namespace teamprec

#endif  // TEAMPREC_RATES_HPP
