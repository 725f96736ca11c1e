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

#include "teamprec/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "teamprec/errors.hpp"
#include "teamprec/parallel.hpp"
#include "teamprec/rng.hpp"

namespace teamprec {

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

bool same_params(const RadioStripeParams& a, const RadioStripeParams& b) {
  return a.L == b.L && a.N == b.N && a.K == b.K && a.r1 == b.r1 && a.r2 == b.r2 &&
         a.height_difference == b.height_difference && a.carrier_ghz == b.carrier_ghz &&
         a.bandwidth_hz == b.bandwidth_hz && a.noise_figure_db == b.noise_figure_db && a.p_sum_mw == b.p_sum_mw &&
         a.kappa == b.kappa && a.epsilon == b.epsilon;
}

NetworkScenario build_scenario(const ScenarioConfig& sc, const RadioStripeParams& params, std::uint64_t seed) {
  NetworkScenario s;
  if (sc.type == "iid") {
    s = iid_scenario(params.L, params.N, params.K, sc.iid_P);
    s.kappa = params.kappa;
    s.epsilon = params.epsilon;
  } else {
    s = build_radio_stripe_scenario(params, seed);
  }
  if (!sc.weights.empty()) {
    s.weights = Eigen::Map<const RVector>(sc.weights.data(), static_cast<Eigen::Index>(sc.weights.size()));
  }
  s.validate();
  return s;
}

struct SchemeResult {
  RateReport report;
  std::optional<ResidualReport> residual;
};

SchemeResult evaluate_scheme(const NetworkScenario& s, Scheme scheme, const ExperimentConfig& c, std::uint64_t rseed) {
  SchemeResult out;
  const PrecoderRule rule = PrecoderRule::prepare(s, scheme, {c.m_stats, rseed});
  const MomentEstimates m = estimate_moments(s, rule, c.m_eval, rseed);
  out.report = evaluate_rates(std::string(to_string(scheme)), m, s);
  if (c.m_res > 0) out.residual = stationarity_residual(s, rule, c.m_res, rseed);
  return out;
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.kind(), context + ": " + e.detail());
}

void append(ResultTable& table, SchemeResult&& result, const std::string& experiment, std::size_t realization,
            std::optional<double> snr_db, double kappa, std::uint64_t seed) {
  const RateReport& r = result.report;
  for (int k = 0; k < r.K(); ++k) {
    ResultRow row;
    row.experiment = experiment;
    row.scheme = r.scheme;
    row.user = k;
    row.realization = realization;
    row.snr_db = snr_db;
    row.kappa = kappa;
    row.rate_bits = r.rate(k);
    row.rate_se = r.rate_se(k);
    row.mse = r.mse(k);
    row.sinr_db = 10.0 * std::log10(r.sinr(k));
    row.p_mw = r.p(k);
    row.seed = seed;
    table.rows.push_back(row);
  }
  table.reports.push_back(std::move(result.report));
  if (result.residual) table.residuals.push_back(std::move(*result.residual));
}

nlohmann::json base_metadata(const ExperimentConfig& c) {
  nlohmann::json config;
  to_json(config, c);
  return nlohmann::json{{"version", kArtifactVersion},
                        {"config", config},
                        {"m_stats", c.m_stats},
                        {"m_eval", c.m_eval},
                        {"m_res", c.m_res},
                        {"batches", kDefaultBatches}};
}

std::string scheme_list(const std::vector<Scheme>& schemes) {
  std::string out;
  for (auto s : schemes) out += (out.empty() ? "" : ",") + std::string(to_string(s));
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Cdf:
      return "cdf";
    case ExperimentKind::SnrSweep:
      return "snr-sweep";
    case ExperimentKind::LocalCompare:
      return "local-compare";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(std::string_view tag) {
  if (tag == "cdf") return ExperimentKind::Cdf;
  if (tag == "snr-sweep") return ExperimentKind::SnrSweep;
  if (tag == "local-compare") return ExperimentKind::LocalCompare;
  throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + std::string(tag) + "'");
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return type == o.type && same_params(stripe, o.stripe) && iid_P == o.iid_P && weights == o.weights;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return kind == o.kind && scenario == o.scenario && schemes == o.schemes && m_stats == o.m_stats &&
         m_eval == o.m_eval && m_res == o.m_res && seed == o.seed && realizations == o.realizations &&
         first_realization == o.first_realization && snr_db == o.snr_db && kappa == o.kappa && cases == o.cases &&
         output_path == o.output_path && output_format == o.output_format;
}

void ExperimentConfig::validate() const {
  require(scenario.type == "radio_stripe" || scenario.type == "iid",
          "config: scenario.type must be 'radio_stripe' or 'iid'");
  require(!schemes.empty(), "config: at least one scheme is required");
  require(m_stats >= kMinStatsSamples, "config: m_stats must be at least 1000");
  require(m_eval >= kMinEvalSamples, "config: m_eval must be at least 1000");
  require(m_res == 0 || m_res >= 1000, "config: m_res must be 0 or at least 1000");
  require(realizations >= 1, "config: realizations must be at least 1");
  require(output_format == "csv" || output_format == "json", "config: output.format must be 'csv' or 'json'");
  require(scenario.type == "radio_stripe" || scenario.iid_P > 0.0, "config: iid scenario needs P > 0");
  switch (kind) {
    case ExperimentKind::Cdf:
      break;
    case ExperimentKind::SnrSweep:
      require(!snr_db.empty(), "config: sweep.snr_db must be nonempty");
      require(!cases.empty(), "config: sweep.cases must be nonempty");
      require(scenario.type == "radio_stripe", "config: the SNR sweep needs a radio_stripe scenario");
      break;
    case ExperimentKind::LocalCompare:
      require(!kappa.empty(), "config: sweep.kappa must be nonempty");
      for (double k : kappa) {
        require(k >= 0.0, "config: kappa must be nonnegative");
        require(k == 0.0 || scenario.stripe.N == 1, "config: kappa > 0 needs N = 1");
      }
      break;
  }
}

ExperimentConfig default_config(ExperimentKind kind, bool paper_scale) {
  ExperimentConfig c;
  c.kind = kind;
  c.scenario.stripe.L = paper_scale ? 30 : 10;
  c.scenario.stripe.K = paper_scale ? 7 : 4;
  c.scenario.stripe.N = 1;
  switch (kind) {
    case ExperimentKind::Cdf:
      c.scenario.stripe.N = paper_scale ? 2 : 1;
      c.schemes = {Scheme::LocalTMMSE, Scheme::UnidirectionalTMMSE, Scheme::CentralizedDirect};
      c.realizations = 20;
      break;
    case ExperimentKind::SnrSweep:
      c.schemes = {Scheme::UnidirectionalTMMSE, Scheme::SGD, Scheme::SGDRobust};
      c.realizations = 1;
      c.snr_db = {-10.0, 0.0, 10.0, 20.0, 30.0, 40.0};
      c.cases = {{"a", 0.0, 0.0}, {"b", 0.0, 0.2}, {"c", 50.0, 0.0}};
      break;
    case ExperimentKind::LocalCompare:
      c.schemes = {Scheme::LocalTMMSE, Scheme::MRT, Scheme::OBE, Scheme::LocalMmseLsfd};
      c.realizations = 20;
      c.kappa = {0.0, 1.0};
      break;
  }
  return c;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  const auto& p = c.scenario.stripe;
  nlohmann::json scenario{{"type", c.scenario.type},
                          {"L", p.L},
                          {"N", p.N},
                          {"K", p.K},
                          {"r1", p.r1},
                          {"r2", p.r2},
                          {"height_m", p.height_difference},
                          {"carrier_ghz", p.carrier_ghz},
                          {"bandwidth_hz", p.bandwidth_hz},
                          {"noise_figure_db", p.noise_figure_db},
                          {"p_sum_mw", p.p_sum_mw},
                          {"kappa", p.kappa},
                          {"epsilon", p.epsilon},
                          {"P", c.scenario.iid_P}};
  if (!c.scenario.weights.empty()) scenario["weights"] = c.scenario.weights;
  std::vector<std::string> schemes;
  for (auto s : c.schemes) schemes.emplace_back(to_string(s));
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& sc : c.cases) cases.push_back({{"name", sc.name}, {"r2", sc.r2}, {"epsilon", sc.epsilon}});
  j = nlohmann::json{{"experiment", std::string(to_string(c.kind))},
                     {"scenario", scenario},
                     {"schemes", schemes},
                     {"m_stats", c.m_stats},
                     {"m_eval", c.m_eval},
                     {"m_res", c.m_res},
                     {"seed", c.seed},
                     {"sweep",
                      {{"realizations", c.realizations},
                       {"first_realization", c.first_realization},
                       {"snr_db", c.snr_db},
                       {"kappa", c.kappa},
                       {"cases", cases}}},
                     {"output", {{"path", c.output_path}, {"format", c.output_format}}}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    c = default_config(experiment_from_string(j.at("experiment").get<std::string>()));
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      auto& p = c.scenario.stripe;
      c.scenario.type = s.value("type", c.scenario.type);
      p.L = s.value("L", p.L);
      p.N = s.value("N", p.N);
      p.K = s.value("K", p.K);
      p.r1 = s.value("r1", p.r1);
      p.r2 = s.value("r2", p.r2);
      p.height_difference = s.value("height_m", p.height_difference);
      p.carrier_ghz = s.value("carrier_ghz", p.carrier_ghz);
      p.bandwidth_hz = s.value("bandwidth_hz", p.bandwidth_hz);
      p.noise_figure_db = s.value("noise_figure_db", p.noise_figure_db);
      p.p_sum_mw = s.value("p_sum_mw", p.p_sum_mw);
      p.kappa = s.value("kappa", p.kappa);
      p.epsilon = s.value("epsilon", p.epsilon);
      c.scenario.iid_P = s.value("P", c.scenario.iid_P);
      if (s.contains("weights")) c.scenario.weights = s.at("weights").get<std::vector<double>>();
    }
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& tag : j.at("schemes")) c.schemes.push_back(scheme_from_string(tag.get<std::string>()));
    }
    c.m_stats = j.value("m_stats", c.m_stats);
    c.m_eval = j.value("m_eval", c.m_eval);
    c.m_res = j.value("m_res", c.m_res);
    c.seed = j.value("seed", c.seed);
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      c.realizations = sw.value("realizations", c.realizations);
      c.first_realization = sw.value("first_realization", c.first_realization);
      c.snr_db = sw.value("snr_db", c.snr_db);
      c.kappa = sw.value("kappa", c.kappa);
      if (sw.contains("cases")) {
        c.cases.clear();
        for (const auto& sc : sw.at("cases")) {
          c.cases.push_back({sc.at("name").get<std::string>(), sc.value("r2", 0.0), sc.value("epsilon", 0.0)});
        }
      }
    }
    if (j.contains("output")) {
      c.output_path = j.at("output").value("path", c.output_path);
      c.output_format = j.at("output").value("format", c.output_format);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "config '" + path + "': " + e.what());
  }
  return j.get<ExperimentConfig>();
}

std::uint64_t realization_seed(std::uint64_t seed, std::size_t realization) {
  return StreamKey{seed, Stream::Scenario, realization}.hash();
}

ResultTable run_cdf_experiment(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  table.metadata = base_metadata(c);
  const std::string id(to_string(ExperimentKind::Cdf));
  for (std::size_t i = 0; i < c.realizations; ++i) {
    const std::size_t r = c.first_realization + i;
    const std::uint64_t rseed = realization_seed(c.seed, r);
    std::ostringstream context;
    context << id << " realization " << r;
    try {
      const NetworkScenario s = build_scenario(c.scenario, c.scenario.stripe, rseed);
      for (Scheme scheme : c.schemes) {
        context.str("");
        context << id << " realization " << r << " scheme " << to_string(scheme);
        append(table, evaluate_scheme(s, scheme, c, rseed), id, r, std::nullopt, s.kappa, c.seed);
      }
    } catch (const Error& e) {
      rethrow_with_context(e, context.str());
    }
  }
  table.metadata["schemes"] = scheme_list(c.schemes);
  return table;
}

ResultTable run_snr_sweep(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  table.metadata = base_metadata(c);
  nlohmann::json powers = nlohmann::json::array();
  for (const auto& sc : c.cases) {
    const std::string id = std::string(to_string(ExperimentKind::SnrSweep)) + "-" + sc.name;
    RadioStripeParams params = c.scenario.stripe;
    params.r2 = sc.r2;
    params.epsilon = sc.epsilon;
    for (std::size_t i = 0; i < c.realizations; ++i) {
      const std::size_t r = c.first_realization + i;
      const std::uint64_t rseed = realization_seed(c.seed, r);
      std::ostringstream context;
      context << id << " realization " << r;
      try {
        const NetworkScenario base = build_scenario(c.scenario, params, rseed);
        const double gain = base.rho2.col(0).sum();
        for (double snr : c.snr_db) {
          NetworkScenario s = base;
          s.P = std::pow(10.0, snr / 10.0) / gain;
          powers.push_back({{"experiment", id}, {"realization", r}, {"snr_db", snr}, {"P_mw", s.P}});
          for (Scheme scheme : c.schemes) {
            context.str("");
            context << id << " realization " << r << " snr " << snr << " dB scheme " << to_string(scheme);
            append(table, evaluate_scheme(s, scheme, c, rseed), id, r, snr, s.kappa, c.seed);
          }
        }
      } catch (const Error& e) {
        rethrow_with_context(e, context.str());
      }
    }
  }
  table.metadata["per_user_power"] = powers;
  return table;
}

ResultTable run_local_comparison(const ExperimentConfig& c) {
  c.validate();
  ResultTable table;
  table.metadata = base_metadata(c);
  const std::string id(to_string(ExperimentKind::LocalCompare));
  for (double kappa : c.kappa) {
    RadioStripeParams params = c.scenario.stripe;
    params.kappa = kappa;
    for (std::size_t i = 0; i < c.realizations; ++i) {
      const std::size_t r = c.first_realization + i;
      const std::uint64_t rseed = realization_seed(c.seed, r);
      std::ostringstream context;
      context << id << " kappa " << kappa << " realization " << r;
      try {
        const NetworkScenario s = build_scenario(c.scenario, params, rseed);
        for (Scheme scheme : c.schemes) {
          context.str("");
          context << id << " kappa " << kappa << " realization " << r << " scheme " << to_string(scheme);
          append(table, evaluate_scheme(s, scheme, c, rseed), id, r, std::nullopt, kappa, c.seed);
        }
      } catch (const Error& e) {
        rethrow_with_context(e, context.str());
      }
    }
  }
  return table;
}

ResultTable run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::Cdf:
      return run_cdf_experiment(c);
    case ExperimentKind::SnrSweep:
      return run_snr_sweep(c);
    case ExperimentKind::LocalCompare:
      return run_local_comparison(c);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown experiment kind");
}

void write_csv(std::ostream& os, const ResultTable& table) {
  os << kCsvHeader << '\n';
  const auto old_precision = os.precision(12);
  for (const auto& r : table.rows) {
    os << r.experiment << ',' << r.scheme << ',' << r.user << ',' << r.realization << ',';
    if (r.snr_db) os << *r.snr_db;
    os << ',' << r.kappa << ',' << r.rate_bits << ',' << r.mse << ',' << r.sinr_db << ',' << r.p_mw << ',' << r.seed
       << '\n';
  }
  os.precision(old_precision);
}

nlohmann::json table_json(const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"experiment", r.experiment},
                    {"scheme", r.scheme},
                    {"user", r.user},
                    {"realization", r.realization},
                    {"snr_db", r.snr_db ? nlohmann::json(*r.snr_db) : nlohmann::json()},
                    {"kappa", r.kappa},
                    {"rate_bits", r.rate_bits},
                    {"rate_se", r.rate_se},
                    {"mse", r.mse},
                    {"sinr_db", r.sinr_db},
                    {"p_mw", r.p_mw},
                    {"seed", r.seed}});
  }
  return nlohmann::json{{"metadata", table.metadata},
                        {"rows", rows},
                        {"reports", table.reports},
                        {"residuals", table.residuals}};
}

}  // namespace teamprec
