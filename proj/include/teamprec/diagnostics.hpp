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

#ifndef TEAMPREC_DIAGNOSTICS_HPP
#define TEAMPREC_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamprec/channel.hpp"
#include "teamprec/precoders.hpp"

namespace teamprec {

/// Per-user summary of the stationarity residual
///   z_{l,k} = (Hhat_l^H Hhat_l + Sigma_l + I/P) t_{l,k} + Hhat_l^H (sum_{j != l} E[Hhat_j t_{j,k} | S_l] - e_k)
/// and of the resulting suboptimality bounds.
struct ResidualReport {
  std::string scheme;
  RMatrix ez2_tx;       // L x K: E||z_{l,k}||^2
  RMatrix ez2_tx_se;
  RVector ez2;          // E||z_k||^2
  RVector ez2_se;       // standard error of ez2
  RVector noise_floor;  // SE^2 of z_k induced by the estimated statistics
  RVector gap_tight;    // E[z_k^H (H^H H + I/P)^{-1} z_k]
  RVector gap_tight_se;
  RVector gap_loose;    // P E||z_k||^2
  RVector gap_loose_se;
  std::vector<bool> loose;  // bound exceeds the trivial value 1
  double max_z_norm = 0.0;
  std::size_t sample_count = 0;
  std::size_t expectation_samples = 0;
  std::uint64_t seed = 0;

  int K() const { return static_cast<int>(ez2.size()); }
};

/// The conditional expectations are closed-form in the statistics of each
/// information structure; the unconditional means they need are estimated on
/// an independent stream with `expectation_samples` draws (0: same as
/// `samples`).
ResidualReport stationarity_residual(const NetworkScenario& scenario, const PrecoderRule& rule, std::size_t samples,
                                     std::uint64_t seed, std::size_t expectation_samples = 0);

struct GapBounds {
  RVector tight;
  RVector loose;
};

GapBounds suboptimality_bounds(const ResidualReport& report);

struct MeasuredGap {
  RVector mean;  // MSE_k(rule) - MSE_k(reference)
  RVector se;
  std::size_t sample_count = 0;
};

/// Paired Monte-Carlo estimate of the MSE difference (common draws).
MeasuredGap measured_gap(const NetworkScenario& scenario, const PrecoderRule& rule, const PrecoderRule& reference,
                         std::size_t samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const ResidualReport& report);
void write_residual_csv(std::ostream& os, const std::vector<ResidualReport>& reports, bool header = true);

}  // namespace teamprec

#endif  // TEAMPREC_DIAGNOSTICS_HPP
