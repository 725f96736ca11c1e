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

#include "teamprec/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "teamprec/errors.hpp"

namespace teamprec {

bool NetworkScenario::unit_weights() const {
  return (weights.array() == 1.0).all();
}

void NetworkScenario::validate() const {
  require(L >= 1 && N >= 1 && K >= 1, "scenario: L, N, K must be positive");
  {
    std::ostringstream os;
    os << "scenario: need K > N (got K=" << K << ", N=" << N << ")";
    require(K > N, os.str());
  }
  require(rho2.rows() == L && rho2.cols() == K, "scenario: rho2 must be L x K");
  require(rho2.allFinite() && (rho2.array() > 0.0).all(), "scenario: rho2 entries must be positive and finite");
  require(std::isfinite(kappa) && kappa >= 0.0, "scenario: kappa must be >= 0");
  require(epsilon >= 0.0 && epsilon < 1.0, "scenario: epsilon must lie in [0, 1)");
  require(std::isfinite(P) && P > 0.0, "scenario: P must be positive and finite");
  require(weights.size() == K, "scenario: weights must have length K");
  require((weights.array() >= 0.0).all(), "scenario: weights must be nonnegative");
  require(std::abs(weights.sum() - K) <= 1e-9 * K, "scenario: weights must sum to K");
  require(kappa == 0.0 || N == 1, "scenario: Ricean fading (kappa > 0) is only supported for N = 1");
}

CMatrix ChannelDraw::H() const {
  CMatrix out(K(), L() * N());
  for (int l = 0; l < L(); ++l) out.middleCols(l * N(), N()) = tx[l].H;
  return out;
}

CMatrix ChannelDraw::Hhat() const {
  CMatrix out(K(), L() * N());
  for (int l = 0; l < L(); ++l) out.middleCols(l * N(), N()) = tx[l].Hhat;
  return out;
}

CMatrix ChannelDraw::Sigma() const {
  const int n = N();
  CMatrix out = CMatrix::Zero(L() * n, L() * n);
  for (int l = 0; l < L(); ++l) out.block(l * n, l * n, n, n) = tx[l].Sigma;
  return out;
}

double path_loss_db(double distance_m, double carrier_ghz) {
  return 36.7 * std::log10(distance_m) + 22.7 + 26.0 * std::log10(carrier_ghz);
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

NetworkScenario build_radio_stripe_scenario(const RadioStripeParams& p, std::uint64_t seed) {
  if (!(p.r2 < p.r1) || p.r2 < 0.0) {
    std::ostringstream os;
    os << "radio stripe: user disc radius r2=" << p.r2 << " must be below stripe radius r1=" << p.r1;
    throw Error(ErrorKind::InvalidGeometry, os.str());
  }
  require(p.L >= 1 && p.N >= 1 && p.K > p.N, "radio stripe: need L >= 1 and K > N >= 1");
  require(p.p_sum_mw > 0.0, "radio stripe: p_sum_mw must be positive");

  NetworkScenario s;
  s.L = p.L;
  s.N = p.N;
  s.K = p.K;
  s.kappa = p.kappa;
  s.epsilon = p.epsilon;
  s.P = p.p_sum_mw / p.K;
  s.weights = RVector::Ones(p.K);

  const double two_pi = 2.0 * std::numbers::pi;
  for (int l = 0; l < p.L; ++l) {
    const double angle = two_pi * l / p.L;
    s.tx_positions.push_back({p.r1 * std::cos(angle), p.r1 * std::sin(angle)});
  }
  CounterRng rng(StreamKey{seed, Stream::Geometry, 0}, 0);
  for (int k = 0; k < p.K; ++k) {
    const double radius = p.r2 * std::sqrt(rng.uniform());
    const double angle = two_pi * rng.uniform();
    s.rx_positions.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }

  const double noise_dbm = noise_power_dbm(p.bandwidth_hz, p.noise_figure_db);
  s.rho2.resize(p.L, p.K);
  for (int l = 0; l < p.L; ++l) {
    for (int k = 0; k < p.K; ++k) {
      const double dx = s.tx_positions[l].x - s.rx_positions[k].x;
      const double dy = s.tx_positions[l].y - s.rx_positions[k].y;
      const double d = std::sqrt(dx * dx + dy * dy + p.height_difference * p.height_difference);
      s.rho2(l, k) = std::pow(10.0, -(path_loss_db(d, p.carrier_ghz) + noise_dbm) / 10.0);
    }
  }
  s.validate();
  return s;
}

NetworkScenario build_radio_stripe_scenario(int L, int N, int K, double r1, double r2, std::uint64_t seed) {
  RadioStripeParams p;
  p.L = L;
  p.N = N;
  p.K = K;
  p.r1 = r1;
  p.r2 = r2;
  return build_radio_stripe_scenario(p, seed);
}

NetworkScenario iid_scenario(int L, int N, int K, double P) {
  NetworkScenario s;
  s.L = L;
  s.N = N;
  s.K = K;
  s.rho2 = RMatrix::Ones(L, K);
  s.P = P;
  s.weights = RVector::Ones(K);
  s.validate();
  return s;
}

TxChannel draw_tx_channel(const NetworkScenario& s, const StreamKey& key, int l) {
  ComplexGaussian gauss(CounterRng(key, static_cast<std::uint64_t>(l)));
  TxChannel tx;
  tx.Hhat.resize(s.K, s.N);
  tx.E = CMatrix::Zero(s.K, s.N);
  const double los_share = s.kappa / (s.kappa + 1.0);
  const double nlos_share = 1.0 / (s.kappa + 1.0);
  double error_power = 0.0;
  for (int k = 0; k < s.K; ++k) {
    const double mean = std::sqrt(los_share * s.rho2(l, k));
    const double scatter = nlos_share * s.rho2(l, k);
    error_power += s.error_variance(l, k);
    for (int n = 0; n < s.N; ++n) {
      tx.Hhat(k, n) = gauss((1.0 - s.epsilon) * scatter, {mean, 0.0});
      if (s.epsilon > 0.0) tx.E(k, n) = gauss(s.epsilon * scatter);
    }
  }
  tx.H = tx.Hhat + tx.E;
  tx.E = tx.H - tx.Hhat;
  tx.Sigma = error_power * CMatrix::Identity(s.N, s.N);
  return tx;
}

ChannelDraw draw_channel(const NetworkScenario& s, const StreamKey& key) {
  ChannelDraw draw;
  draw.tx.reserve(s.L);
  for (int l = 0; l < s.L; ++l) draw.tx.push_back(draw_tx_channel(s, key, l));
  return draw;
}

TxChannel apply_weights(const TxChannel& tx, const NetworkScenario& s, int l) {
  if (s.unit_weights()) return tx;
  TxChannel out = tx;
  const RVector root = s.weights.array().sqrt();
  out.Hhat = root.asDiagonal() * tx.Hhat;
  out.H = root.asDiagonal() * tx.H;
  out.E = out.H - out.Hhat;
  double error_power = 0.0;
  for (int k = 0; k < s.K; ++k) error_power += s.weights(k) * s.error_variance(l, k);
  out.Sigma = error_power * CMatrix::Identity(s.N, s.N);
  return out;
}

ChannelDraw apply_weights(const ChannelDraw& draw, const NetworkScenario& s) {
  if (s.unit_weights()) return draw;
  ChannelDraw out;
  out.tx.reserve(draw.tx.size());
  for (int l = 0; l < draw.L(); ++l) out.tx.push_back(apply_weights(draw.tx[l], s, l));
  return out;
}

void to_json(nlohmann::json& j, const NetworkScenario& s) {
  nlohmann::json rho2 = nlohmann::json::array();
  for (int l = 0; l < s.rho2.rows(); ++l) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < s.rho2.cols(); ++k) row.push_back(s.rho2(l, k));
    rho2.push_back(row);
  }
  std::vector<double> w(s.weights.data(), s.weights.data() + s.weights.size());
  j = nlohmann::json{{"L", s.L}, {"N", s.N}, {"K", s.K}, {"rho2", rho2}, {"kappa", s.kappa},
                     {"epsilon", s.epsilon}, {"P", s.P}, {"weights", w}};
  auto points = [](const std::vector<Point2>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : pts) a.push_back({p.x, p.y});
    return a;
  };
  if (!s.tx_positions.empty()) j["tx_positions"] = points(s.tx_positions);
  if (!s.rx_positions.empty()) j["rx_positions"] = points(s.rx_positions);
}

void from_json(const nlohmann::json& j, NetworkScenario& s) {
  s.L = j.at("L").get<int>();
  s.N = j.at("N").get<int>();
  s.K = j.at("K").get<int>();
  const auto& rho2 = j.at("rho2");
  require(rho2.is_array() && static_cast<int>(rho2.size()) == s.L, "scenario json: rho2 must have L rows");
  s.rho2.resize(s.L, s.K);
  for (int l = 0; l < s.L; ++l) {
    require(static_cast<int>(rho2[l].size()) == s.K, "scenario json: rho2 rows must have K entries");
    for (int k = 0; k < s.K; ++k) s.rho2(l, k) = rho2[l][k].get<double>();
  }
  s.kappa = j.value("kappa", 0.0);
  s.epsilon = j.value("epsilon", 0.0);
  s.P = j.at("P").get<double>();
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    s.weights = Eigen::Map<const RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
  } else {
    s.weights = RVector::Ones(s.K);
  }
  auto points = [](const nlohmann::json& a) {
    std::vector<Point2> pts;
    for (const auto& p : a) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return pts;
  };
  s.tx_positions = j.contains("tx_positions") ? points(j["tx_positions"]) : std::vector<Point2>{};
  s.rx_positions = j.contains("rx_positions") ? points(j["rx_positions"]) : std::vector<Point2>{};
  s.validate();
}

}  // namespace teamprec
