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

#include "teamprec/rates.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "teamprec/errors.hpp"
#include "teamprec/parallel.hpp"

namespace teamprec {

namespace {

struct MomentSums {
  CVector gain;
  RMatrix second;
  RVector power;
  std::size_t count = 0;

  explicit MomentSums(int K) : gain(CVector::Zero(K)), second(RMatrix::Zero(K, K)), power(RVector::Zero(K)) {}

  void add(const CMatrix& G, const CMatrix& T) {
    gain += G.diagonal();
    second += G.cwiseAbs2();
    power += T.colwise().squaredNorm().transpose();
    ++count;
  }

  MomentEstimates finish() const {
    const double n = static_cast<double>(count);
    return make_moments(gain / n, second / n, power / n, count);
  }
};

double sinr_denominator_tolerance(double scale) { return 1e-12 * std::max(1.0, scale); }

}  // namespace

MomentEstimates make_moments(const CVector& mean_gain, const RMatrix& second, const RVector& power, std::size_t count) {
  const auto K = mean_gain.size();
  require(second.rows() == K && second.cols() == K && power.size() == K, "moments: inconsistent dimensions");
  MomentEstimates m;
  m.mean_gain = mean_gain;
  m.second = second;
  m.power = power;
  m.sample_count = count;
  const double n = static_cast<double>(count);
  const double correction = count > 1 ? n / (n - 1.0) : 1.0;
  m.variance.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    m.variance(k) = std::max(0.0, second(k, k) - std::norm(mean_gain(k))) * correction;
  }
  return m;
}

MomentEstimates estimate_moments(const NetworkScenario& s, const PrecodeFn& precode, std::size_t samples,
                                 std::uint64_t seed) {
  s.validate();
  std::ostringstream os;
  os << "evaluation needs at least " << kMinEvalSamples << " samples (got " << samples << ")";
  require(samples >= kMinEvalSamples, os.str());

  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<MomentSums> partial(plan.count, MomentSums(s.K));
  parallel_for(plan.count, [&](std::size_t b) {
    MomentSums acc(s.K);
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw draw = draw_channel(s, {seed, Stream::Evaluation, m});
      const CMatrix T = precode(apply_weights(draw, s));
      acc.add(draw.H() * T, T);
    }
    partial[b] = std::move(acc);
  });

  MomentSums total(s.K);
  std::vector<MomentEstimates> batches;
  for (const auto& p : partial) {
    total.gain += p.gain;
    total.second += p.second;
    total.power += p.power;
    total.count += p.count;
    batches.push_back(p.finish());
  }
  MomentEstimates out = total.finish();
  out.seed = seed;
  out.batches = std::move(batches);
  return out;
}

MomentEstimates estimate_moments(const NetworkScenario& s, const PrecoderRule& rule, std::size_t samples,
                                 std::uint64_t seed) {
  return estimate_moments(s, [&](const ChannelDraw& d) { return rule.apply(d).T; }, samples, seed);
}

RVector evaluate_mse(const MomentEstimates& m, double P, const RVector& w) {
  const int K = m.K();
  require(w.size() == K, "evaluate_mse: weight vector has wrong length");
  RVector mse(K);
  for (int k = 0; k < K; ++k) {
    mse(k) = w.dot(m.second.col(k)) - 2.0 * std::sqrt(w(k)) * m.mean_gain(k).real() + 1.0 + m.power(k) / P;
  }
  return mse;
}

RVector draw_mse(const ChannelDraw& weighted_draw, const CMatrix& T, double P) {
  CMatrix residual = weighted_draw.H() * T;
  residual.diagonal().array() -= 1.0;
  return (residual.colwise().squaredNorm() + T.colwise().squaredNorm() / P).transpose();
}

RVector uatf_sinr(const MomentEstimates& m, const RVector& w, double P) {
  const int K = m.K();
  require(w.size() == K, "uatf_sinr: weight vector has wrong length");
  RVector sinr(K);
  for (int k = 0; k < K; ++k) {
    double denom = w(k) * m.variance(k) + m.power(k) / P;
    for (int j = 0; j < K; ++j) {
      if (j != k) denom += w(j) * m.second(j, k);
    }
    const double signal = w(k) * std::norm(m.mean_gain(k));
    if (!std::isfinite(denom) || denom <= sinr_denominator_tolerance(0.0) * signal) {
      std::ostringstream os;
      os << "UatF SINR denominator of user " << k << " is " << denom;
      throw Error(ErrorKind::DegenerateDenominator, os.str());
    }
    sinr(k) = signal / denom;
  }
  return sinr;
}

PowerAllocation dl_power_allocation(const MomentEstimates& m, const RVector& w, double P) {
  const int K = m.K();
  const RVector sinr = uatf_sinr(m, w, P);
  RMatrix system(K, K);
  RMatrix system_t(K, K);
  for (int k = 0; k < K; ++k) {
    const double gain2 = std::norm(m.mean_gain(k));
    if (!(gain2 > 0.0) || !(sinr(k) > 0.0)) {
      throw Error(ErrorKind::DivisionByZero, "power allocation needs nonzero mean gains");
    }
    if (!(m.power(k) > 0.0)) throw Error(ErrorKind::DivisionByZero, "power allocation needs nonzero precoders");
  }
  // B(k, j) = E|g_k^H t_j|^2 / E||t_j||^2, diagonal V_k / E||t_k||^2; D = diag(d).
  RMatrix B(K, K);
  RVector d_inv(K);
  for (int k = 0; k < K; ++k) {
    d_inv(k) = std::norm(m.mean_gain(k)) / (sinr(k) * m.power(k));
    for (int j = 0; j < K; ++j) B(k, j) = (j == k ? m.variance(k) : m.second(k, j)) / m.power(j);
  }
  system = RMatrix(d_inv.asDiagonal()) - B;
  system_t = RMatrix(d_inv.asDiagonal()) - B.transpose();
  const CMatrix rhs = (system_t * w).cast<cplx>();
  const RVector p_tilde = linalg::solve(system.cast<cplx>(), rhs).real();

  const double sum_w = w.sum();
  if (std::abs(p_tilde.sum() - sum_w) > 1e-6 * std::max(1.0, sum_w)) {
    std::ostringstream os;
    os << "dual power allocation violates the sum constraint: " << p_tilde.sum() << " vs " << sum_w;
    throw Error(ErrorKind::SingularMatrix, os.str());
  }
  PowerAllocation out;
  out.p_tilde = p_tilde;
  out.p.resize(K);
  for (int k = 0; k < K; ++k) {
    if (p_tilde(k) < -1e-9) {
      std::ostringstream os;
      os << "negative dual power " << p_tilde(k) << " for user " << k;
      throw Error(ErrorKind::NegativePower, os.str());
    }
    out.p(k) = std::max(0.0, p_tilde(k)) * P / m.power(k);
  }
  return out;
}

RVector hardening_rate(const MomentEstimates& m, const RVector& p) {
  const int K = m.K();
  require(p.size() == K, "hardening_rate: power vector has wrong length");
  RVector rate(K);
  for (int k = 0; k < K; ++k) {
    require(p(k) >= 0.0, "hardening_rate: negative power");
    double denom = p(k) * m.variance(k) + 1.0;
    for (int j = 0; j < K; ++j) {
      if (j != k) denom += p(j) * m.second(k, j);
    }
    rate(k) = std::log2(1.0 + p(k) * std::norm(m.mean_gain(k)) / denom);
  }
  return rate;
}

RateReport evaluate_rates(const std::string& scheme, const MomentEstimates& m, const NetworkScenario& s) {
  RateReport r;
  r.scheme = scheme;
  r.sample_count = m.sample_count;
  r.seed = m.seed;
  r.p_sum = s.p_sum();
  r.mse = evaluate_mse(m, s.P, s.weights);
  r.rate_dual = -r.mse.array().log() / std::log(2.0);
  r.sinr = uatf_sinr(m, s.weights, s.P);
  const PowerAllocation alloc = dl_power_allocation(m, s.weights, s.P);
  r.p = alloc.p;
  r.p_tilde = alloc.p_tilde;
  r.radiated_power = r.p.dot(m.power);
  r.rate = hardening_rate(m, r.p);

  const int K = m.K();
  const auto nb = static_cast<Eigen::Index>(m.batches.size());
  r.batch_rate = RMatrix::Zero(K, nb);
  r.rate_se = RVector::Zero(K);
  for (Eigen::Index b = 0; b < nb; ++b) {
    r.batch_rate.col(b) = (1.0 + uatf_sinr(m.batches[b], s.weights, s.P).array()).log() / std::log(2.0);
  }
  if (nb > 1) {
    for (int k = 0; k < K; ++k) {
      const RVector row = r.batch_rate.row(k).transpose();
      const double var = (row.array() - row.mean()).square().sum() / static_cast<double>(nb - 1);
      r.rate_se(k) = std::sqrt(var / static_cast<double>(nb));
    }
  }
  return r;
}

double paired_rate_se(const RateReport& a, const RateReport& b, int k) {
  const auto nb = a.batch_rate.cols();
  require(nb == b.batch_rate.cols() && nb > 1, "paired_rate_se: batch layouts differ");
  const RVector diff = (a.batch_rate.row(k) - b.batch_rate.row(k)).transpose();
  const double var = (diff.array() - diff.mean()).square().sum() / static_cast<double>(nb - 1);
  return std::sqrt(var / static_cast<double>(nb));
}

void to_json(nlohmann::json& j, const RateReport& r) {
  auto vec = [](const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j = nlohmann::json{{"scheme", r.scheme},
                     {"mse", vec(r.mse)},
                     {"rate_dual", vec(r.rate_dual)},
                     {"sinr_uatf", vec(r.sinr)},
                     {"rate_bits", vec(r.rate)},
                     {"rate_se", vec(r.rate_se)},
                     {"p_mw", vec(r.p)},
                     {"p_tilde", vec(r.p_tilde)},
                     {"radiated_power_mw", r.radiated_power},
                     {"p_sum_mw", r.p_sum},
                     {"sample_count", r.sample_count},
                     {"seed", r.seed}};
}

void write_rate_csv(std::ostream& os, const std::vector<RateReport>& reports, bool header) {
  if (header) os << "scheme,user,MSE,SINR_uatf_dB,rate_bits,p_mW,M_eval,seed\n";
  const auto old_precision = os.precision(12);
  for (const auto& r : reports) {
    for (int k = 0; k < r.K(); ++k) {
      os << r.scheme << ',' << k << ',' << r.mse(k) << ',' << 10.0 * std::log10(r.sinr(k)) << ',' << r.rate(k) << ','
         << r.p(k) << ',' << r.sample_count << ',' << r.seed << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace teamprec
