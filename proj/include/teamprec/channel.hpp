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

#ifndef TEAMPREC_CHANNEL_HPP
#define TEAMPREC_CHANNEL_HPP

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "teamprec/linalg.hpp"
#include "teamprec/rng.hpp"

namespace teamprec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Static description of a network: L TXs with N antennas, K single-antenna
/// users, the per-link gains rho2 (noise-normalized, 1/mW), the fading and
/// estimation-error parameters, the per-user power P = P_sum / K (mW) and the
/// MSE weights (on the simplex sum w = K).
struct NetworkScenario {
  int L = 0;
  int N = 0;
  int K = 0;
  RMatrix rho2;  // L x K
  double kappa = 0.0;
  double epsilon = 0.0;
  double P = 1.0;
  RVector weights;  // length K

  // Placement, when the scenario came from a geometry (empty otherwise).
  std::vector<Point2> tx_positions;
  std::vector<Point2> rx_positions;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  double p_sum() const { return P * K; }
  bool unit_weights() const;

  /// Variance of each error entry of TX l towards user k.
  double error_variance(int l, int k) const { return epsilon * rho2(l, k) / (kappa + 1.0); }
};

/// Channel of one TX: estimate, error and the error covariance E[E^H E].
struct TxChannel {
  CMatrix Hhat;   // K x N
  CMatrix E;      // K x N
  CMatrix H;      // K x N, H = Hhat + E
  CMatrix Sigma;  // N x N
};

/// One joint realization of all TX channels.
struct ChannelDraw {
  std::vector<TxChannel> tx;

  int L() const { return static_cast<int>(tx.size()); }
  int K() const { return tx.empty() ? 0 : static_cast<int>(tx.front().Hhat.rows()); }
  int N() const { return tx.empty() ? 0 : static_cast<int>(tx.front().Hhat.cols()); }

  /// K x LN stacked true channel [H_1 ... H_L].
  CMatrix H() const;
  /// K x LN stacked estimate.
  CMatrix Hhat() const;
  /// LN x LN block-diagonal error covariance.
  CMatrix Sigma() const;
};

// Path loss and noise of the radio-stripe arena.
double path_loss_db(double distance_m, double carrier_ghz);
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

struct RadioStripeParams {
  int L = 30;
  int N = 2;
  int K = 7;
  double r1 = 60.0;  // stripe radius [m]
  double r2 = 50.0;  // user disc radius [m]
  double height_difference = 10.0;  // [m]
  double carrier_ghz = 2.0;
  double bandwidth_hz = 20e6;
  double noise_figure_db = 7.0;
  double p_sum_mw = 100.0;
  double kappa = 0.0;
  double epsilon = 0.0;
};

/// TXs equally spaced on a circle of radius r1, users i.i.d. uniform in the
/// concentric disc of radius r2, 3GPP UMi NLoS path loss.
NetworkScenario build_radio_stripe_scenario(const RadioStripeParams& params, std::uint64_t seed);

NetworkScenario build_radio_stripe_scenario(int L, int N, int K, double r1, double r2, std::uint64_t seed);

/// All gains one, Rayleigh fading, perfect CSIT, unit weights.
NetworkScenario iid_scenario(int L, int N, int K, double P);

/// Draws every TX channel of one realization. TX l uses substream l of key.
ChannelDraw draw_channel(const NetworkScenario& scenario, const StreamKey& key);

/// Draws only TX l of the realization identified by key (same values as the
/// corresponding entry of draw_channel).
TxChannel draw_tx_channel(const NetworkScenario& scenario, const StreamKey& key, int l);

/// Applies the MSE weights by scaling user rows with sqrt(w_k); the error
/// covariance is rebuilt accordingly. Identity when all weights are one.
ChannelDraw apply_weights(const ChannelDraw& draw, const NetworkScenario& scenario);
TxChannel apply_weights(const TxChannel& tx, const NetworkScenario& scenario, int l);

void to_json(nlohmann::json& j, const NetworkScenario& s);
void from_json(const nlohmann::json& j, NetworkScenario& s);

}  // namespace teamprec

#endif  // TEAMPREC_CHANNEL_HPP
