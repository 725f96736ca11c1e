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

#include "teamprec/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "teamprec/accumulate.hpp"
#include "teamprec/errors.hpp"
#include "teamprec/parallel.hpp"
#include "teamprec/rates.hpp"

namespace teamprec {

namespace {

/// Closed-form pieces of sum_{j != l} E[Hhat_j t_{j,k} | S_l].
struct ExpectationModel {
  InfoStructure info = InfoStructure::Centralized;
  std::vector<CMatrix> x;                // Local: X_l
  std::vector<std::vector<CMatrix>> psi;  // Unidirectional: Psi_l per user
};

CMatrix sequential_stage(const PrecoderRule& rule, int l, const TxChannel& tx) {
  if (rule.scheme == Scheme::UnidirectionalTMMSE) {
    const CMatrix F = local_mmse_stage(tx.Hhat, tx.Sigma, rule.P);
    return F * sequential_factors(tx.Hhat * F, rule.stats->for_tx(l)).V;
  }
  return zf_stage(tx.Hhat);
}

/// Per-batch sums of the sampled products, one entry per TX.
std::vector<std::vector<MatrixMoments>> expectation_batches(
    const NetworkScenario& s, std::size_t samples, std::uint64_t seed,
    const std::function<CMatrix(const ChannelDraw&, int)>& sample) {
  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<std::vector<MatrixMoments>> partial(plan.count);
  parallel_for(plan.count, [&](std::size_t b) {
    std::vector<MatrixMoments> acc(s.L, MatrixMoments(s.K, s.K));
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw d = apply_weights(draw_channel(s, {seed, Stream::ResidualExpectation, m}), s);
      for (int l = 0; l < s.L; ++l) acc[l].add(sample(d, l));
    }
    partial[b] = std::move(acc);
  });
  return partial;
}

std::vector<CMatrix> means_of(const std::vector<MatrixMoments>& moments) {
  std::vector<CMatrix> out;
  for (const auto& m : moments) out.push_back(m.mean());
  return out;
}

ExpectationModel local_model(const std::vector<CMatrix>& mean) {
  ExpectationModel model;
  model.info = InfoStructure::Local;
  const int L = static_cast<int>(mean.size());
  for (int l = 0; l < L; ++l) {
    CMatrix x = CMatrix::Zero(mean[l].rows(), mean[l].cols());
    for (int j = 0; j < L; ++j) {
      if (j != l) x += mean[j];
    }
    model.x.push_back(std::move(x));
  }
  return model;
}

ExpectationModel sequential_model(const std::vector<CMatrix>& mean, const RVector& mu) {
  ExpectationModel model;
  model.info = InfoStructure::Unidirectional;
  const int L = static_cast<int>(mean.size());
  const auto K = mean.front().rows();
  const CMatrix identity = CMatrix::Identity(K, K);
  model.psi.assign(L, std::vector<CMatrix>(K, CMatrix::Zero(K, K)));
  for (int l = L - 2; l >= 0; --l) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const CMatrix a = mu(k) * mean[l + 1];
      const CMatrix& next = model.psi[l + 1][k];
      model.psi[l][k] = a + next * (identity - a);
    }
  }
  return model;
}

/// Full model plus one model per sample batch; the spread of the batch
/// models measures the sampling error of the full one.
struct ModelSet {
  ExpectationModel full;
  std::vector<ExpectationModel> batches;
};

ModelSet build_models(const NetworkScenario& s, const PrecoderRule& rule, std::size_t samples, std::uint64_t seed) {
  ModelSet set;
  const InfoStructure info = info_structure(rule.scheme);
  if (info == InfoStructure::Centralized) return set;

  std::vector<std::vector<MatrixMoments>> partial;
  if (info == InfoStructure::Local) {
    partial = expectation_batches(s, samples, seed, [&](const ChannelDraw& d, int l) {
      return CMatrix(d.tx[l].Hhat * rule.apply(d).block(l));
    });
  } else {
    partial = expectation_batches(s, samples, seed, [&](const ChannelDraw& d, int l) {
      return CMatrix(d.tx[l].Hhat * sequential_stage(rule, l, d.tx[l]));
    });
  }
  std::vector<MatrixMoments> total(s.L, MatrixMoments(s.K, s.K));
  for (const auto& p : partial) {
    for (int l = 0; l < s.L; ++l) total[l].merge(p[l]);
  }
  const RVector mu = rule.mu.size() == s.K ? rule.mu : RVector::Ones(s.K);
  auto build = [&](const std::vector<MatrixMoments>& moments) {
    return info == InfoStructure::Local ? local_model(means_of(moments)) : sequential_model(means_of(moments), mu);
  };
  set.full = build(total);
  for (const auto& p : partial) set.batches.push_back(build(p));
  return set;
}

struct ResidualSums {
  MatrixMoments ez2_tx;
  MatrixMoments ez2;
  MatrixMoments tight;
  MatrixMoments floor;
  double max_z = 0.0;

  ResidualSums(int L, int K) : ez2_tx(L, K), ez2(K, 1), tight(K, 1), floor(K, 1) {}

  void merge(const ResidualSums& o) {
    ez2_tx.merge(o.ez2_tx);
    ez2.merge(o.ez2);
    tight.merge(o.tight);
    floor.merge(o.floor);
    max_z = std::max(max_z, o.max_z);
  }
};

RVector real_column(const CMatrix& m) { return m.col(0).real(); }

}  // namespace

ResidualReport stationarity_residual(const NetworkScenario& s, const PrecoderRule& rule, std::size_t samples,
                                     std::uint64_t seed, std::size_t expectation_samples) {
  s.validate();
  require(samples >= 2, "stationarity_residual: need at least two samples");
  if (expectation_samples == 0) expectation_samples = samples;

  const ModelSet models = build_models(s, rule, expectation_samples, seed);
  const ExpectationModel& model = models.full;

  const int L = s.L;
  const int K = s.K;
  const int N = s.N;
  const CMatrix identity = CMatrix::Identity(K, K);
  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<ResidualSums> partial(plan.count, ResidualSums(L, K));
  parallel_for(plan.count, [&](std::size_t b) {
    ResidualSums acc(L, K);
    std::vector<CMatrix> ht(L);
    CMatrix z(static_cast<Eigen::Index>(L) * N, K);
    RMatrix z2_tx(L, K);
    CMatrix floor = CMatrix::Zero(K, 1);
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw d = apply_weights(draw_channel(s, {seed, Stream::Residual, m}), s);
      const PrecoderSet set = rule.apply(d);
      CMatrix total = CMatrix::Zero(K, K);
      for (int l = 0; l < L; ++l) {
        ht[l] = d.tx[l].Hhat * set.block(l);
        total += ht[l];
      }
      floor.setZero();
      CMatrix before = CMatrix::Zero(K, K);  // sum_{j<l} Hhat_j T_j
      for (int l = 0; l < L; ++l) {
        const TxChannel& tx = d.tx[l];
        const CMatrix T = set.block(l);
        CMatrix x(K, K);
        switch (model.info) {
          case InfoStructure::Local:
            x = model.x[l];
            for (const auto& batch : models.batches) {
              floor.col(0) += (tx.Hhat.adjoint() * (batch.x[l] - x)).colwise().squaredNorm().transpose().cast<cplx>();
            }
            break;
          case InfoStructure::Centralized:
            x = total - ht[l];
            break;
          case InfoStructure::Unidirectional: {
            const CMatrix r = identity - before - ht[l];
            for (int k = 0; k < K; ++k) {
              x.col(k) = before.col(k) + model.psi[l][k] * r.col(k);
              for (const auto& batch : models.batches) {
                floor(k, 0) += (tx.Hhat.adjoint() * ((batch.psi[l][k] - model.psi[l][k]) * r.col(k))).squaredNorm();
              }
            }
            break;
          }
        }
        x -= identity;
        CMatrix zl = tx.Hhat.adjoint() * (tx.Hhat * T) + tx.Sigma * T + T / s.P + tx.Hhat.adjoint() * x;
        z.middleRows(static_cast<Eigen::Index>(l) * N, N) = zl;
        z2_tx.row(l) = zl.colwise().squaredNorm();
        before += ht[l];
      }
      const CMatrix H = d.H();
      CMatrix q = H.adjoint() * H;
      q.diagonal().array() += 1.0 / s.P;
      const Eigen::SelfAdjointEigenSolver<CMatrix> eig(q);
      const CMatrix w = eig.eigenvectors().adjoint() * z;
      const RVector inv_eval = eig.eigenvalues().cwiseInverse();
      CMatrix tight(K, 1);
      for (int k = 0; k < K; ++k) tight(k, 0) = w.col(k).cwiseAbs2().dot(inv_eval);

      acc.ez2_tx.add(z2_tx.cast<cplx>());
      acc.ez2.add(z.colwise().squaredNorm().transpose().cast<cplx>());
      acc.tight.add(tight);
      acc.floor.add(floor);
      acc.max_z = std::max(acc.max_z, z.colwise().norm().maxCoeff());
    }
    partial[b] = std::move(acc);
  });

  ResidualSums total(L, K);
  for (const auto& p : partial) total.merge(p);

  ResidualReport r;
  r.scheme = std::string(to_string(rule.scheme));
  r.sample_count = samples;
  r.expectation_samples = model.info == InfoStructure::Centralized ? 0 : expectation_samples;
  r.seed = seed;
  r.ez2_tx = total.ez2_tx.mean().real();
  r.ez2_tx_se = total.ez2_tx.standard_error();
  r.ez2 = real_column(total.ez2.mean());
  r.ez2_se = total.ez2.standard_error().col(0);
  const auto nb = static_cast<double>(models.batches.size());
  double floor_scale = nb > 1 ? 1.0 / (nb * (nb - 1.0)) : 0.0;
  if (rule.stats && rule.stats->sample_count > 0 &&
      (rule.scheme == Scheme::LocalTMMSE || rule.scheme == Scheme::UnidirectionalTMMSE)) {
    floor_scale *= 1.0 + static_cast<double>(expectation_samples) / static_cast<double>(rule.stats->sample_count);
  }
  r.noise_floor = floor_scale * real_column(total.floor.mean());
  r.gap_tight = real_column(total.tight.mean());
  r.gap_tight_se = total.tight.standard_error().col(0);
  r.gap_loose = s.P * r.ez2;
  r.gap_loose_se = s.P * r.ez2_se;
  r.max_z_norm = total.max_z;
  for (int k = 0; k < K; ++k) r.loose.push_back(r.gap_tight(k) > 1.0);
  return r;
}

GapBounds suboptimality_bounds(const ResidualReport& report) { return {report.gap_tight, report.gap_loose}; }

MeasuredGap measured_gap(const NetworkScenario& s, const PrecoderRule& rule, const PrecoderRule& reference,
                         std::size_t samples, std::uint64_t seed) {
  s.validate();
  require(samples >= 2, "measured_gap: need at least two samples");
  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<MatrixMoments> partial(plan.count);
  parallel_for(plan.count, [&](std::size_t b) {
    MatrixMoments acc(s.K, 1);
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const ChannelDraw d = apply_weights(draw_channel(s, {seed, Stream::Evaluation, m}), s);
      const RVector diff = draw_mse(d, rule.apply(d).T, s.P) - draw_mse(d, reference.apply(d).T, s.P);
      acc.add(diff.cast<cplx>());
    }
    partial[b] = std::move(acc);
  });
  MatrixMoments total(s.K, 1);
  for (const auto& p : partial) total.merge(p);
  MeasuredGap g;
  g.mean = real_column(total.mean());
  g.se = total.standard_error().col(0);
  g.sample_count = samples;
  return g;
}

void to_json(nlohmann::json& j, const ResidualReport& r) {
  auto vec = [](const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json per_tx = nlohmann::json::array();
  for (Eigen::Index l = 0; l < r.ez2_tx.rows(); ++l) per_tx.push_back(vec(r.ez2_tx.row(l).transpose()));
  j = nlohmann::json{{"scheme", r.scheme},
                     {"E_z2", vec(r.ez2)},
                     {"E_z2_se", vec(r.ez2_se)},
                     {"E_z2_per_tx", per_tx},
                     {"noise_floor", vec(r.noise_floor)},
                     {"gap_tight", vec(r.gap_tight)},
                     {"gap_tight_se", vec(r.gap_tight_se)},
                     {"gap_loose", vec(r.gap_loose)},
                     {"gap_loose_se", vec(r.gap_loose_se)},
                     {"loose", r.loose},
                     {"max_z_norm", r.max_z_norm},
                     {"M_res", r.sample_count},
                     {"expectation_samples", r.expectation_samples},
                     {"seed", r.seed}};
}

void write_residual_csv(std::ostream& os, const std::vector<ResidualReport>& reports, bool header) {
  if (header) os << "scheme,user,E_z2,gap_tight,gap_loose,M_res\n";
  const auto old_precision = os.precision(12);
  for (const auto& r : reports) {
    for (int k = 0; k < r.K(); ++k) {
      os << r.scheme << ',' << k << ',' << r.ez2(k) << ',' << r.gap_tight(k) << ',' << r.gap_loose(k) << ','
         << r.sample_count << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace teamprec
