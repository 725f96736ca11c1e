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

#ifndef TEAMPREC_STATISTICS_HPP
#define TEAMPREC_STATISTICS_HPP

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "teamprec/channel.hpp"
#include "teamprec/linalg.hpp"

namespace teamprec {

inline constexpr std::size_t kDefaultStatsSamples = 20000;
inline constexpr std::size_t kMinStatsSamples = 1000;

enum class StatsScheme { Local, Unidirectional };

/// Long-term matrices Pi_l shared by all TXs.
///
/// Local: pi[l] = E[Hhat_l F_l] for TX l = 0..L-1.
/// Unidirectional: pi has L+1 entries, pi[i] is the backward-recursion
/// matrix after i TXs (pi[L] = 0). TX l (0-based) uses pi[l + 1].
struct LongTermStats {
  StatsScheme scheme = StatsScheme::Local;
  std::vector<CMatrix> pi;
  std::vector<RMatrix> entry_se;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  double standard_error_estimate = 0.0;

  int L() const { return scheme == StatsScheme::Local ? static_cast<int>(pi.size()) : static_cast<int>(pi.size()) - 1; }
  const CMatrix& for_tx(int l) const { return scheme == StatsScheme::Local ? pi.at(l) : pi.at(l + 1); }
  const RMatrix& se_for_tx(int l) const { return scheme == StatsScheme::Local ? entry_se.at(l) : entry_se.at(l + 1); }

  /// Throws StatsOutOfRange when some Pi fails 0 <= Pi < I.
  void check_range() const;
};

/// Builds stats from given matrices (all standard errors zero). For
/// Unidirectional, `pi` lists Pi_0..Pi_L and Pi_L must be zero.
LongTermStats make_stats(StatsScheme scheme, std::vector<CMatrix> pi);

/// F_l = (Hhat^H Hhat + Sigma + I / P)^{-1} Hhat^H, N x K.
CMatrix local_mmse_stage(const CMatrix& Hhat, const CMatrix& Sigma, double P);

/// Per-draw factors of the sequential TMMSE recursion at one TX:
/// P = Hhat F, V = (I - Pi P)^{-1} (I - Pi), Vbar = I - P V.
struct SequentialFactors {
  CMatrix P;
  CMatrix V;
  CMatrix Vbar;
};

SequentialFactors sequential_factors(const CMatrix& projector, const CMatrix& pi);

/// Monte-Carlo estimate of Pi_l = E[Hhat_l F_l] over M draws of the
/// statistics stream. Throws StatsOutOfRange if an estimate leaves [0, I).
LongTermStats estimate_local_pi(const NetworkScenario& scenario, std::size_t samples, std::uint64_t seed);

/// Backward recursion Pi_{l} = E[P_{l+1} V_{l+1}] + Pi_{l+1} E[Vbar_{l+1}],
/// Pi_L = 0, each step averaged over M fresh draws of TX l+1.
LongTermStats estimate_unidirectional_pi(const NetworkScenario& scenario, std::size_t samples, std::uint64_t seed);

nlohmann::json complex_matrix_json(const CMatrix& m);
CMatrix complex_matrix_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const LongTermStats& stats);
void from_json(const nlohmann::json& j, LongTermStats& stats);

}  // namespace teamprec

#endif  // TEAMPREC_STATISTICS_HPP
