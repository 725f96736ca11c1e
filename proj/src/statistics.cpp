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

#include "teamprec/statistics.hpp"

#include <sstream>

#include "teamprec/accumulate.hpp"
#include "teamprec/errors.hpp"
#include "teamprec/parallel.hpp"

namespace teamprec {

void LongTermStats::check_range() const {
  for (std::size_t i = 0; i < pi.size(); ++i) {
    linalg::PsdReport report;
    try {
      report = linalg::psd_check(pi[i], true);
    } catch (const Error& e) {
      throw Error(ErrorKind::StatsOutOfRange, std::string("Pi is not Hermitian: ") + e.what());
    }
    if (!report.pass) {
      std::ostringstream os;
      os << "Pi[" << i << "] eigenvalues in [" << report.min_eigenvalue << ", " << report.max_eigenvalue
         << "], outside [0, 1); increase the statistics sample count";
      throw Error(ErrorKind::StatsOutOfRange, os.str());
    }
  }
}

LongTermStats make_stats(StatsScheme scheme, std::vector<CMatrix> pi) {
  require(!pi.empty(), "make_stats: empty Pi list");
  LongTermStats stats;
  stats.scheme = scheme;
  for (const auto& p : pi) stats.entry_se.push_back(RMatrix::Zero(p.rows(), p.cols()));
  stats.pi = std::move(pi);
  if (scheme == StatsScheme::Unidirectional) {
    require(linalg::max_abs(stats.pi.back()) == 0.0, "make_stats: last unidirectional Pi must be zero");
  }
  return stats;
}

CMatrix local_mmse_stage(const CMatrix& Hhat, const CMatrix& Sigma, double P) {
  require(P > 0.0, "local_mmse_stage: P must be positive");
  CMatrix gram = Hhat.adjoint() * Hhat + Sigma;
  gram.diagonal().array() += 1.0 / P;
  return linalg::solve_hpd(gram, Hhat.adjoint());
}

SequentialFactors sequential_factors(const CMatrix& projector, const CMatrix& pi) {
  const auto k = projector.rows();
  const CMatrix identity = CMatrix::Identity(k, k);
  SequentialFactors f;
  f.P = projector;
  f.V = linalg::solve(identity - pi * projector, identity - pi);
  f.Vbar = identity - projector * f.V;
  return f;
}

namespace {

void check_samples(std::size_t samples) {
  std::ostringstream os;
  os << "statistics need at least " << kMinStatsSamples << " samples (got " << samples << ")";
  require(samples >= kMinStatsSamples, os.str());
}

void finish(LongTermStats& stats) {
  double worst = 0.0;
  for (const auto& se : stats.entry_se) worst = std::max(worst, se.size() ? se.maxCoeff() : 0.0);
  stats.standard_error_estimate = worst;
}

}  // namespace

LongTermStats estimate_local_pi(const NetworkScenario& s, std::size_t samples, std::uint64_t seed) {
  s.validate();
  check_samples(samples);
  const BatchPlan plan(samples, kDefaultBatches);
  std::vector<std::vector<MatrixMoments>> partial(plan.count);
  parallel_for(plan.count, [&](std::size_t b) {
    std::vector<MatrixMoments> acc(s.L, MatrixMoments(s.K, s.K));
    for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
      const StreamKey key{seed, Stream::Statistics, m};
      for (int l = 0; l < s.L; ++l) {
        const TxChannel tx = apply_weights(draw_tx_channel(s, key, l), s, l);
        acc[l].add(tx.Hhat * local_mmse_stage(tx.Hhat, tx.Sigma, s.P));
      }
    }
    partial[b] = std::move(acc);
  });

  LongTermStats stats;
  stats.scheme = StatsScheme::Local;
  stats.sample_count = samples;
  stats.seed = seed;
  for (int l = 0; l < s.L; ++l) {
    MatrixMoments total(s.K, s.K);
    for (const auto& p : partial) total.merge(p[l]);
    stats.pi.push_back(linalg::hermitian_part(total.mean()));
    stats.entry_se.push_back(total.standard_error());
  }
  finish(stats);
  stats.check_range();
  return stats;
}

LongTermStats estimate_unidirectional_pi(const NetworkScenario& s, std::size_t samples, std::uint64_t seed) {
  s.validate();
  check_samples(samples);
  LongTermStats stats;
  stats.scheme = StatsScheme::Unidirectional;
  stats.sample_count = samples;
  stats.seed = seed;
  stats.pi.assign(s.L + 1, CMatrix::Zero(s.K, s.K));
  stats.entry_se.assign(s.L + 1, RMatrix::Zero(s.K, s.K));

  const BatchPlan plan(samples, kDefaultBatches);
  for (int i = s.L - 1; i >= 0; --i) {
    // TX i (0-based) consumes Pi[i + 1] and produces Pi[i].
    const CMatrix& next = stats.pi[i + 1];
    std::vector<MatrixMoments> partial(plan.count);
    try {
      parallel_for(plan.count, [&](std::size_t b) {
        MatrixMoments acc(s.K, s.K);
        for (std::size_t m = plan.begin(b); m < plan.end(b); ++m) {
          const StreamKey key{seed, Stream::Statistics, m};
          const TxChannel tx = apply_weights(draw_tx_channel(s, key, i), s, i);
          const CMatrix projector = tx.Hhat * local_mmse_stage(tx.Hhat, tx.Sigma, s.P);
          const SequentialFactors f = sequential_factors(projector, next);
          acc.add(f.P * f.V + next * f.Vbar);
        }
        partial[b] = std::move(acc);
      });
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularMatrix) throw;
      throw Error(ErrorKind::StatsOutOfRange, std::string("unidirectional recursion: ") + e.what());
    }
    MatrixMoments total(s.K, s.K);
    for (const auto& p : partial) total.merge(p);
    stats.pi[i] = linalg::hermitian_part(total.mean());
    stats.entry_se[i] = total.standard_error();
    const auto report = linalg::psd_check(stats.pi[i], true);
    if (!report.pass) {
      std::ostringstream os;
      os << "unidirectional Pi[" << i << "] eigenvalues in [" << report.min_eigenvalue << ", "
         << report.max_eigenvalue << "], outside [0, 1)";
      throw Error(ErrorKind::StatsOutOfRange, os.str());
    }
  }
  finish(stats);
  return stats;
}

nlohmann::json complex_matrix_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

CMatrix complex_matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(static_cast<Eigen::Index>(j[r].size()) == cols, "complex matrix json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = {j[r][c].at(0).get<double>(), j[r][c].at(1).get<double>()};
  }
  return m;
}

void to_json(nlohmann::json& j, const LongTermStats& stats) {
  nlohmann::json pis = nlohmann::json::array();
  for (const auto& p : stats.pi) pis.push_back(complex_matrix_json(p));
  nlohmann::json ses = nlohmann::json::array();
  for (const auto& se : stats.entry_se) ses.push_back(complex_matrix_json(se.cast<cplx>()));
  j = nlohmann::json{{"scheme", stats.scheme == StatsScheme::Local ? "local" : "unidirectional"},
                     {"pi", pis},
                     {"entry_se", ses},
                     {"sample_count", stats.sample_count},
                     {"seed", stats.seed},
                     {"standard_error_estimate", stats.standard_error_estimate}};
}

void from_json(const nlohmann::json& j, LongTermStats& stats) {
  const auto tag = j.at("scheme").get<std::string>();
  require(tag == "local" || tag == "unidirectional", "stats json: unknown scheme " + tag);
  stats.scheme = tag == "local" ? StatsScheme::Local : StatsScheme::Unidirectional;
  stats.pi.clear();
  stats.entry_se.clear();
  for (const auto& p : j.at("pi")) stats.pi.push_back(complex_matrix_from_json(p));
  for (const auto& se : j.at("entry_se")) stats.entry_se.push_back(complex_matrix_from_json(se).real());
  stats.sample_count = j.at("sample_count").get<std::size_t>();
  stats.seed = j.at("seed").get<std::uint64_t>();
  stats.standard_error_estimate = j.value("standard_error_estimate", 0.0);
}

}  // namespace teamprec
