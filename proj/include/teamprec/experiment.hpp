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

#ifndef TEAMPREC_EXPERIMENT_HPP
#define TEAMPREC_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamprec/channel.hpp"
#include "teamprec/diagnostics.hpp"
#include "teamprec/precoders.hpp"
#include "teamprec/rates.hpp"

namespace teamprec {

enum class ExperimentKind { Cdf, SnrSweep, LocalCompare };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(std::string_view tag);

/// Scenario block of a configuration: either the radio-stripe geometry or an
/// i.i.d. Rayleigh network with unit gains.
struct ScenarioConfig {
  std::string type = "radio_stripe";  // "radio_stripe" | "iid"
  RadioStripeParams stripe{10, 1, 4};
  double iid_P = 1.0;
  std::vector<double> weights;  // empty: all ones

  bool operator==(const ScenarioConfig&) const;
};

/// One sub-case of the SNR sweep (user disc radius and estimation error).
struct SweepCase {
  std::string name;
  double r2 = 0.0;
  double epsilon = 0.0;

  bool operator==(const SweepCase&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Cdf;
  ScenarioConfig scenario;
  std::vector<Scheme> schemes;
  std::size_t m_stats = kDefaultStatsSamples;
  std::size_t m_eval = 20000;
  std::size_t m_res = 0;  // 0: no residual diagnostics
  std::uint64_t seed = 1;
  std::size_t realizations = 20;
  std::size_t first_realization = 0;
  std::vector<double> snr_db;
  std::vector<double> kappa;
  std::vector<SweepCase> cases;
  std::string output_path;
  std::string output_format = "csv";  // "csv" | "json"

  /// Throws InvalidArgument / UnsupportedScheme on a malformed config.
  void validate() const;

  bool operator==(const ExperimentConfig&) const;
};

/// Desk-scale defaults of each experiment; `paper_scale` switches to
/// L = 30, K = 7 (N = 2 for the CDF study, N = 1 otherwise).
ExperimentConfig default_config(ExperimentKind kind, bool paper_scale = false);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing fields take the defaults of the experiment kind.
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string experiment;
  std::string scheme;
  int user = 0;
  std::size_t realization = 0;
  std::optional<double> snr_db;
  double kappa = 0.0;
  double rate_bits = 0.0;
  double rate_se = 0.0;
  double mse = 0.0;
  double sinr_db = 0.0;
  double p_mw = 0.0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<RateReport> reports;
  std::vector<ResidualReport> residuals;
  nlohmann::json metadata;
};

/// Seed of placement realization r: every stream of that realization is keyed
/// by it, so (seed, r) reproduces its rows in isolation.
std::uint64_t realization_seed(std::uint64_t seed, std::size_t realization);

ResultTable run_cdf_experiment(const ExperimentConfig& config);
ResultTable run_snr_sweep(const ExperimentConfig& config);
ResultTable run_local_comparison(const ExperimentConfig& config);
ResultTable run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader = "experiment,scheme,user,realization,snr_db,kappa,rate_bits,mse,sinr_db,p_mw,seed";

void write_csv(std::ostream& os, const ResultTable& table);
nlohmann::json table_json(const ResultTable& table);

}  // namespace teamprec

#endif  // TEAMPREC_EXPERIMENT_HPP
