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

#include "teamprec/precoders.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "teamprec/accumulate.hpp"
#include "teamprec/errors.hpp"
#include "teamprec/parallel.hpp"

namespace teamprec {

namespace {

struct SchemeName {
  Scheme scheme;
  std::string_view tag;
};

constexpr std::array<SchemeName, 10> kSchemeNames{{
    {Scheme::LocalTMMSE, "local-tmmse"},
    {Scheme::UnidirectionalTMMSE, "unidirectional-tmmse"},
    {Scheme::CentralizedRecursive, "centralized-recursive"},
    {Scheme::CentralizedDirect, "centralized"},
    {Scheme::MRT, "mrt"},
    {Scheme::OBE, "obe"},
    {Scheme::LocalMmseLsfd, "local-mmse-lsfd"},
    {Scheme::SGD, "sgd"},
    {Scheme::SGDRobust, "sgd-robust"},
    {Scheme::SequentialZF, "sequential-zf"},
}};

PrecoderSet empty_set(Scheme scheme, const ChannelDraw& draw) {
  require(draw.L() > 0, "precoder: empty channel draw");
  PrecoderSet set;
  set.scheme = scheme;
  set.L = draw.L();
  set.N = draw.N();
  set.T = CMatrix::Zero(static_cast<Eigen::Index>(draw.L()) * draw.N(), draw.K());
  return set;
}

CMatrix projector_of(const TxChannel& tx, double P, CMatrix* stage) {
  CMatrix F = local_mmse_stage(tx.Hhat, tx.Sigma, P);
  CMatrix proj = tx.Hhat * F;
  if (stage) *stage = std::move(F);
  return proj;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  for (const auto& n : kSchemeNames) {
    if (n.scheme == scheme) return n.tag;
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view tag) {
  for (const auto& n : kSchemeNames) {
    if (n.tag == tag) return n.scheme;
  }
  throw Error(ErrorKind::UnsupportedScheme, "unknown scheme tag '" + std::string(tag) + "'");
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> schemes = [] {
    std::vector<Scheme> v;
    for (const auto& n : kSchemeNames) v.push_back(n.scheme);
    return v;
  }();
  return schemes;
}

InfoStructure info_structure(Scheme scheme) {
  switch (scheme) {
    case Scheme::LocalTMMSE:
    case Scheme::MRT:
    case Scheme::OBE:
    case Scheme::LocalMmseLsfd:
      return InfoStructure::Local;
    case Scheme::UnidirectionalTMMSE:
    case Scheme::SGD:
    case Scheme::SGDRobust:
    case Scheme::SequentialZF:
      return InfoStructure::Unidirectional;
    case Scheme::CentralizedRecursive:
    case Scheme::CentralizedDirect:
      return InfoStructure::Centralized;
  }
  return InfoStructure::Centralized;
}

LocalCoefficients solve_local_coefficients(const LongTermStats& stats) {
  require(stats.scheme == StatsScheme::Local, "local coefficients need local statistics");
  const int L = stats.L();
  require(L > 0, "local coefficients: no TX");
  const auto K = stats.pi.front().rows();
  const CMatrix identity = CMatrix::Identity(K, K);

  std::vector<CMatrix> resolvent(L);
  CMatrix core = identity;
  for (int l = 0; l < L; ++l) {
    resolvent[l] = linalg::inverse(identity - stats.pi[l]);
    core += stats.pi[l] * resolvent[l];
  }
  const CMatrix core_inv = linalg::inverse(core);

  LocalCoefficients out;
  out.C.reserve(L);
  for (int l = 0; l < L; ++l) out.C.push_back(resolvent[l] * core_inv);
  return out;
}

PrecoderSet local_tmmse(const ChannelDraw& draw, double P, const LocalCoefficients& coeffs) {
  require(static_cast<int>(coeffs.C.size()) == draw.L(), "local_tmmse: coefficient count does not match L");
  PrecoderSet set = empty_set(Scheme::LocalTMMSE, draw);
  for (int l = 0; l < draw.L(); ++l) {
    const TxChannel& tx = draw.tx[l];
    set.block(l) = local_mmse_stage(tx.Hhat, tx.Sigma, P) * coeffs.C[l];
  }
  return set;
}

PrecoderSet mrt(const ChannelDraw& draw) {
  PrecoderSet set = empty_set(Scheme::MRT, draw);
  for (int l = 0; l < draw.L(); ++l) set.block(l) = draw.tx[l].Hhat.adjoint();
  return set;
}

std::vector<CMatrix> solve_obe_coefficients(const std::vector<CMatrix>& gram, const std::vector<CMatrix>& weighted_gram) {
  const int L = static_cast<int>(gram.size());
  require(L > 0 && weighted_gram.size() == gram.size(), "obe: moment lists do not match");
  const auto K = gram.front().rows();
  CMatrix system = CMatrix::Zero(L * K, L * K);
  CMatrix rhs(L * K, K);
  for (int l = 0; l < L; ++l) {
    for (int j = 0; j < L; ++j) {
      system.block(l * K, j * K, K, K) = (l == j) ? weighted_gram[l] : CMatrix(gram[l] * gram[j]);
    }
    rhs.middleRows(l * K, K) = gram[l];
  }
  const CMatrix stacked = linalg::solve(system, rhs);
  std::vector<CMatrix> C(L);
  for (int l = 0; l < L; ++l) C[l] = stacked.middleRows(l * K, K);
  return C;
}

ObeCoefficients estimate_obe_coefficients(const NetworkScenario& s, std::size_t samples, std::uint64_t seed) {
  s.validate();
  require(samples >= 2, "obe: need at least two samples");
  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<std::vector<MatrixMoments>> partial(plan.count);
  parallel_for(plan.count, [&](std::size_t b) {
    std::vector<MatrixMoments> acc(2 * s.L, MatrixMoments(s.K, s.K));
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw draw = apply_weights(draw_channel(s, {seed, Stream::ObeMoments, m}), s);
      for (int l = 0; l < s.L; ++l) {
        const TxChannel& tx = draw.tx[l];
        CMatrix inner = tx.Hhat.adjoint() * tx.Hhat + tx.Sigma;
        inner.diagonal().array() += 1.0 / s.P;
        acc[l].add(tx.Hhat * tx.Hhat.adjoint());
        acc[s.L + l].add(tx.Hhat * inner * tx.Hhat.adjoint());
      }
    }
    partial[b] = std::move(acc);
  });
  ObeCoefficients out;
  out.sample_count = samples;
  for (int i = 0; i < 2 * s.L; ++i) {
    MatrixMoments total(s.K, s.K);
    for (const auto& p : partial) total.merge(p[i]);
    (i < s.L ? out.gram : out.weighted_gram).push_back(linalg::hermitian_part(total.mean()));
  }
  out.C = solve_obe_coefficients(out.gram, out.weighted_gram);
  return out;
}

PrecoderSet obe(const ChannelDraw& draw, const ObeCoefficients& coeffs) {
  require(static_cast<int>(coeffs.C.size()) == draw.L(), "obe: coefficient count does not match L");
  PrecoderSet set = empty_set(Scheme::OBE, draw);
  for (int l = 0; l < draw.L(); ++l) set.block(l) = draw.tx[l].Hhat.adjoint() * coeffs.C[l];
  return set;
}

LsfdMoments estimate_lsfd_moments(const NetworkScenario& s, std::size_t samples, std::uint64_t seed) {
  s.validate();
  require(samples >= 2, "lsfd: need at least two samples");
  const BatchPlan plan(samples, kDefaultBatches);
  struct Partial {
    std::vector<MatrixMoments> cross;
    MatrixMoments gain;
    MatrixMoments power;
  };
  std::vector<Partial> partial(plan.count);
  parallel_for(plan.count, [&](std::size_t b) {
    Partial acc{std::vector<MatrixMoments>(s.K, MatrixMoments(s.L, s.L)), MatrixMoments(s.L, s.K),
                MatrixMoments(s.L, s.K)};
    std::vector<CMatrix> effective(s.L);
    CMatrix gain(s.L, s.K);
    CMatrix power(s.L, s.K);
    CMatrix cross(s.L, s.L);
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw draw = apply_weights(draw_channel(s, {seed, Stream::LsfdMoments, m}), s);
      for (int l = 0; l < s.L; ++l) {
        const TxChannel& tx = draw.tx[l];
        const CMatrix F = local_mmse_stage(tx.Hhat, tx.Sigma, s.P);
        effective[l] = tx.H * F;
        gain.row(l) = effective[l].diagonal().transpose();
        power.row(l) = F.colwise().squaredNorm().cast<cplx>();
      }
      for (int k = 0; k < s.K; ++k) {
        for (int l = 0; l < s.L; ++l) {
          for (int j = 0; j < s.L; ++j) cross(l, j) = effective[l].col(k).dot(effective[j].col(k));
        }
        acc.cross[k].add(cross);
      }
      acc.gain.add(gain);
      acc.power.add(power);
    }
    partial[b] = std::move(acc);
  });

  LsfdMoments out;
  out.sample_count = samples;
  MatrixMoments gain(s.L, s.K);
  MatrixMoments power(s.L, s.K);
  std::vector<MatrixMoments> cross(s.K, MatrixMoments(s.L, s.L));
  for (const auto& p : partial) {
    gain.merge(p.gain);
    power.merge(p.power);
    for (int k = 0; k < s.K; ++k) cross[k].merge(p.cross[k]);
  }
  const CMatrix gain_mean = gain.mean();
  out.power = power.mean().real();
  for (int k = 0; k < s.K; ++k) {
    out.cross.push_back(linalg::hermitian_part(cross[k].mean()));
    out.gain.push_back(gain_mean.col(k));
  }
  return out;
}

CMatrix solve_lsfd_coefficients(const NetworkScenario& s, const LsfdMoments& moments) {
  require(static_cast<int>(moments.cross.size()) == s.K, "lsfd: moment count does not match K");
  CMatrix coeffs(s.L, s.K);
  for (int k = 0; k < s.K; ++k) {
    CMatrix system = moments.cross[k];
    system.diagonal() += (moments.power.col(k) / s.P).cast<cplx>();
    coeffs.col(k) = linalg::solve_hpd(system, moments.gain[k].conjugate());
  }
  return coeffs;
}

PrecoderSet local_mmse_lsfd(const ChannelDraw& draw, double P, const CMatrix& coeffs) {
  require(coeffs.rows() == draw.L() && coeffs.cols() == draw.K(), "lsfd: coefficient table has wrong shape");
  PrecoderSet set = empty_set(Scheme::LocalMmseLsfd, draw);
  for (int l = 0; l < draw.L(); ++l) {
    const TxChannel& tx = draw.tx[l];
    set.block(l) = local_mmse_stage(tx.Hhat, tx.Sigma, P) * coeffs.row(l).asDiagonal();
  }
  return set;
}

PrecoderSet sequential_precode(const ChannelDraw& draw, Scheme scheme, const StageFn& stage, const RVector* mu) {
  PrecoderSet set = empty_set(scheme, draw);
  const int K = draw.K();
  require(!mu || mu->size() == K, "sequential precoder: mu has wrong length");
  CMatrix R = CMatrix::Identity(K, K);
  for (int l = 0; l < draw.L(); ++l) {
    const TxChannel& tx = draw.tx[l];
    CMatrix T = stage(l, tx) * R;
    if (mu) T *= mu->asDiagonal();
    R -= tx.Hhat * T;
    set.block(l) = T;
  }
  return set;
}

PrecoderSet unidirectional_tmmse(const ChannelDraw& draw, double P, const LongTermStats& stats) {
  require(stats.scheme == StatsScheme::Unidirectional, "unidirectional_tmmse needs unidirectional statistics");
  require(stats.L() == draw.L(), "unidirectional_tmmse: statistics do not match L");
  return sequential_precode(
      draw, Scheme::UnidirectionalTMMSE,
      [&](int l, const TxChannel& tx) {
        CMatrix F;
        const CMatrix proj = projector_of(tx, P, &F);
        return CMatrix(F * sequential_factors(proj, stats.for_tx(l)).V);
      },
      nullptr);
}

PrecoderSet centralized_mmse_recursive(const ChannelDraw& draw, double P) {
  const int L = draw.L();
  const int K = draw.K();
  std::vector<CMatrix> stages(L);
  std::vector<CMatrix> V(L);
  CMatrix pbar = CMatrix::Zero(K, K);
  for (int l = L - 1; l >= 0; --l) {
    const CMatrix proj = projector_of(draw.tx[l], P, &stages[l]);
    const SequentialFactors f = sequential_factors(proj, pbar);
    V[l] = f.V;
    pbar = f.P * f.V + pbar * f.Vbar;
  }
  return sequential_precode(
      draw, Scheme::CentralizedRecursive, [&](int l, const TxChannel&) { return CMatrix(stages[l] * V[l]); },
      nullptr);
}

PrecoderSet centralized_mmse_direct(const ChannelDraw& draw, double P) {
  require(P > 0.0, "centralized precoder: P must be positive");
  const CMatrix Hhat = draw.Hhat();
  CMatrix gram = Hhat.adjoint() * Hhat + draw.Sigma();
  gram.diagonal().array() += 1.0 / P;
  PrecoderSet set = empty_set(Scheme::CentralizedDirect, draw);
  set.T = linalg::solve_hpd(gram, Hhat.adjoint());
  return set;
}

std::vector<CVector> sequential_transmit(const ChannelDraw& draw, double P, const LongTermStats& stats,
                                         const CVector& u) {
  require(stats.scheme == StatsScheme::Unidirectional, "sequential_transmit needs unidirectional statistics");
  require(u.size() == draw.K(), "sequential_transmit: symbol vector has wrong length");
  std::vector<CVector> x(draw.L());
  CVector forwarded = u;
  for (int l = 0; l < draw.L(); ++l) {
    CMatrix F;
    const CMatrix proj = projector_of(draw.tx[l], P, &F);
    const SequentialFactors f = sequential_factors(proj, stats.for_tx(l));
    x[l] = F * (f.V * forwarded);
    forwarded = f.Vbar * forwarded;
  }
  return x;
}

CMatrix zf_stage(const CMatrix& Hhat_l) {
  if (Hhat_l.cols() == 1) {
    const double norm2 = Hhat_l.squaredNorm();
    if (!(norm2 > 0.0)) throw Error(ErrorKind::DivisionByZero, "zero channel estimate in sequential ZF stage");
    return Hhat_l.adjoint() / norm2;
  }
  return linalg::solve_hpd(Hhat_l.adjoint() * Hhat_l, Hhat_l.adjoint());
}

PrecoderSet sgd_precoder(const ChannelDraw& draw, const RVector& mu) {
  if (draw.N() != 1) throw Error(ErrorKind::UnsupportedScheme, "SGD precoding needs single-antenna TXs");
  return sequential_precode(
      draw, Scheme::SGD, [](int, const TxChannel& tx) { return zf_stage(tx.Hhat); }, &mu);
}

PrecoderSet sequential_zf(const ChannelDraw& draw) {
  if (draw.N() >= draw.K()) throw Error(ErrorKind::UnsupportedScheme, "sequential ZF needs N < K");
  const RVector ones = RVector::Ones(draw.K());
  return sequential_precode(
      draw, Scheme::SequentialZF, [](int, const TxChannel& tx) { return zf_stage(tx.Hhat); }, &ones);
}

double sgd_mse(const NetworkScenario& s, const std::vector<ChannelDraw>& draws, int k, double mu) {
  require(!draws.empty(), "sgd_mse: no draws");
  const int K = s.K;
  double total = 0.0;
  for (const auto& draw : draws) {
    CVector r = CVector::Unit(K, k);
    CVector received = CVector::Zero(K);
    double power = 0.0;
    for (int l = 0; l < draw.L(); ++l) {
      const TxChannel& tx = draw.tx[l];
      const CVector t = (zf_stage(tx.Hhat) * r) * mu;
      r -= tx.Hhat * t;
      received += tx.H * t;
      power += t.squaredNorm();
    }
    total += (received - CVector::Unit(K, k)).squaredNorm() + power / s.P;
  }
  return total / static_cast<double>(draws.size());
}

RVector tune_sgd_mu(const NetworkScenario& s, std::size_t samples, std::uint64_t seed) {
  s.validate();
  if (s.N != 1) throw Error(ErrorKind::UnsupportedScheme, "SGD precoding needs single-antenna TXs");
  require(samples >= 1, "tune_sgd_mu: need at least one sample");
  std::vector<ChannelDraw> draws(samples);
  parallel_for(samples, [&](std::size_t m) {
    draws[m] = apply_weights(draw_channel(s, {seed, Stream::Tuning, m}), s);
  });

  RVector mu(s.K);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  parallel_for(static_cast<std::size_t>(s.K), [&](std::size_t user) {
    const int k = static_cast<int>(user);
    double a = 0.0;
    double b = kSgdMuUpper;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = sgd_mse(s, draws, k, c);
    double fd = sgd_mse(s, draws, k, d);
    while (b - a > kSgdMuTolerance) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - ratio * (b - a);
        fc = sgd_mse(s, draws, k, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + ratio * (b - a);
        fd = sgd_mse(s, draws, k, d);
      }
    }
    mu(k) = 0.5 * (a + b);
  });
  return mu;
}

PrecoderRule PrecoderRule::prepare(const NetworkScenario& s, Scheme scheme, const StatsConfig& config) {
  s.validate();
  PrecoderRule rule;
  rule.scheme = scheme;
  rule.P = s.P;
  switch (scheme) {
    case Scheme::LocalTMMSE:
      rule.stats = estimate_local_pi(s, config.samples, config.seed);
      rule.local_coeffs = solve_local_coefficients(*rule.stats);
      break;
    case Scheme::UnidirectionalTMMSE:
      rule.stats = estimate_unidirectional_pi(s, config.samples, config.seed);
      break;
    case Scheme::OBE:
      rule.obe_coeffs = estimate_obe_coefficients(s, config.samples, config.seed);
      break;
    case Scheme::LocalMmseLsfd:
      rule.lsfd_coeffs = solve_lsfd_coefficients(s, estimate_lsfd_moments(s, config.samples, config.seed));
      break;
    case Scheme::SGD:
      if (s.N != 1) throw Error(ErrorKind::UnsupportedScheme, "SGD precoding needs single-antenna TXs");
      rule.mu = RVector::Ones(s.K);
      break;
    case Scheme::SGDRobust:
      rule.mu = tune_sgd_mu(s, config.samples, config.seed);
      break;
    case Scheme::SequentialZF:
      if (s.N >= s.K) throw Error(ErrorKind::UnsupportedScheme, "sequential ZF needs N < K");
      break;
    case Scheme::CentralizedRecursive:
    case Scheme::CentralizedDirect:
    case Scheme::MRT:
      break;
  }
  return rule;
}

PrecoderSet PrecoderRule::apply(const ChannelDraw& design_draw) const {
  PrecoderSet set;
  switch (scheme) {
    case Scheme::LocalTMMSE:
      set = local_tmmse(design_draw, P, *local_coeffs);
      break;
    case Scheme::UnidirectionalTMMSE:
      set = unidirectional_tmmse(design_draw, P, *stats);
      break;
    case Scheme::CentralizedRecursive:
      set = centralized_mmse_recursive(design_draw, P);
      break;
    case Scheme::CentralizedDirect:
      set = centralized_mmse_direct(design_draw, P);
      break;
    case Scheme::MRT:
      set = mrt(design_draw);
      break;
    case Scheme::OBE:
      set = obe(design_draw, *obe_coeffs);
      break;
    case Scheme::LocalMmseLsfd:
      set = local_mmse_lsfd(design_draw, P, *lsfd_coeffs);
      break;
    case Scheme::SGD:
    case Scheme::SGDRobust:
      set = sgd_precoder(design_draw, mu);
      break;
    case Scheme::SequentialZF:
      set = sequential_zf(design_draw);
      break;
  }
  set.scheme = scheme;
  return set;
}

void to_json(nlohmann::json& j, const PrecoderSet& set) {
  j = nlohmann::json{{"scheme", std::string(to_string(set.scheme))},
                     {"L", set.L},
                     {"N", set.N},
                     {"K", set.K()},
                     {"T", complex_matrix_json(set.T)}};
}

}  // namespace teamprec
