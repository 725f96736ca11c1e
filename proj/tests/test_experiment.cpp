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

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "teamprec/errors.hpp"
#include "teamprec/experiment.hpp"

using namespace teamprec;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  c.scenario.stripe.L = 4;
  c.scenario.stripe.K = 3;
  c.scenario.stripe.N = 1;
  c.m_stats = 1000;
  c.m_eval = 1000;
  c.realizations = 2;
  return c;
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("experiment kind tags") {
  for (ExperimentKind k : {ExperimentKind::Cdf, ExperimentKind::SnrSweep, ExperimentKind::LocalCompare}) {
    CHECK(experiment_from_string(to_string(k)) == k);
  }
  CHECK(to_string(ExperimentKind::SnrSweep) == "snr-sweep");
  CHECK_THROWS_AS(experiment_from_string("fig5"), Error);
}

TEST_CASE("default configurations") {
  const ExperimentConfig cdf = default_config(ExperimentKind::Cdf);
  CHECK_NOTHROW(cdf.validate());
  CHECK(cdf.scenario.stripe.L == 10);
  CHECK(cdf.scenario.stripe.K == 4);
  CHECK(cdf.scenario.stripe.N == 1);
  CHECK(cdf.realizations == 20);
  CHECK(cdf.m_eval == 20000);
  CHECK(cdf.schemes.size() == 3);

  const ExperimentConfig sweep = default_config(ExperimentKind::SnrSweep);
  CHECK_NOTHROW(sweep.validate());
  CHECK(sweep.cases.size() == 3);
  CHECK(sweep.snr_db.front() == -10.0);
  CHECK(sweep.snr_db.back() == 40.0);

  const ExperimentConfig local = default_config(ExperimentKind::LocalCompare);
  CHECK_NOTHROW(local.validate());
  CHECK(local.kappa == std::vector<double>{0.0, 1.0});
  CHECK(local.schemes.size() == 4);

  const ExperimentConfig full = default_config(ExperimentKind::Cdf, true);
  CHECK(full.scenario.stripe.L == 30);
  CHECK(full.scenario.stripe.K == 7);
  CHECK(full.scenario.stripe.N == 2);
  CHECK(default_config(ExperimentKind::LocalCompare, true).scenario.stripe.N == 1);
}

TEST_CASE("config json round trip") {
  for (ExperimentKind k : {ExperimentKind::Cdf, ExperimentKind::SnrSweep, ExperimentKind::LocalCompare}) {
    ExperimentConfig c = small(k);
    c.seed = 77;
    c.m_res = 2000;
    c.output_path = "out.json";
    c.output_format = "json";
    c.scenario.weights = {0.5, 1.0, 1.5};
    const nlohmann::json j = c;
    CHECK(j.get<ExperimentConfig>() == c);
    CHECK(nlohmann::json::parse(j.dump()).get<ExperimentConfig>() == c);
  }
}

TEST_CASE("missing fields take defaults") {
  const nlohmann::json j = {{"experiment", "local-compare"}, {"seed", 5}};
  const ExperimentConfig c = j.get<ExperimentConfig>();
  ExperimentConfig expected = default_config(ExperimentKind::LocalCompare);
  expected.seed = 5;
  CHECK(c == expected);
}

TEST_CASE("config validation") {
  const nlohmann::json base = small(ExperimentKind::Cdf);
  auto with = [&](const std::function<void(nlohmann::json&)>& edit) {
    nlohmann::json j = base;
    edit(j);
    return kind_of([&] { (void)j.get<ExperimentConfig>(); });
  };
  CHECK(with([](nlohmann::json& j) { j["schemes"] = {"bogus"}; }) == ErrorKind::UnsupportedScheme);
  CHECK(with([](nlohmann::json& j) { j["schemes"] = nlohmann::json::array(); }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["m_eval"] = 10; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["m_stats"] = 999; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["m_res"] = 5; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["m_eval"] = "many"; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["experiment"] = "fig9"; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["output"]["format"] = "xml"; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["sweep"]["realizations"] = 0; }) == ErrorKind::InvalidArgument);
  CHECK(with([](nlohmann::json& j) { j["scenario"]["type"] = "hexgrid"; }) == ErrorKind::InvalidArgument);

  ExperimentConfig sweep = small(ExperimentKind::SnrSweep);
  sweep.snr_db.clear();
  CHECK_THROWS_AS(sweep.validate(), Error);
  ExperimentConfig local = small(ExperimentKind::LocalCompare);
  local.scenario.stripe.N = 2;
  local.scenario.stripe.K = 4;
  CHECK_THROWS_AS(local.validate(), Error);
}

TEST_CASE("load config from file") {
  const auto path = std::filesystem::temp_directory_path() / "teamprec_test_config.json";
  const ExperimentConfig c = small(ExperimentKind::Cdf);
  {
    std::ofstream out(path);
    out << nlohmann::json(c).dump(2);
  }
  CHECK(load_config(path.string()) == c);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK(kind_of([&] { load_config(path.string()); }) == ErrorKind::InvalidArgument);
  std::filesystem::remove(path);
  CHECK(kind_of([&] { load_config(path.string()); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("single realization and scheme gives K rows") {
  ExperimentConfig c = small(ExperimentKind::Cdf);
  c.realizations = 1;
  c.schemes = {Scheme::CentralizedDirect};
  const ResultTable t = run_experiment(c);
  REQUIRE(t.rows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(t.rows[k].user == k);
    CHECK(t.rows[k].scheme == "centralized");
    CHECK(t.rows[k].experiment == "cdf");
    CHECK_FALSE(t.rows[k].snr_db.has_value());
  }
  CHECK(t.reports.size() == 1);
  CHECK(t.residuals.empty());
}

TEST_CASE("cdf experiment rows and determinism") {
  const ExperimentConfig c = small(ExperimentKind::Cdf);
  const ResultTable a = run_cdf_experiment(c);
  CHECK(a.rows.size() == 3 * c.schemes.size() * c.realizations);
  for (const auto& r : a.rows) {
    CHECK(r.rate_bits >= 0.0);
    CHECK(r.seed == c.seed);
  }
  const std::string csv = csv_of(a);
  CHECK(csv.substr(0, csv.find('\n')) == kCsvHeader);
  CHECK(csv_of(run_cdf_experiment(c)) == csv);
  CHECK(table_json(a).dump() == table_json(run_cdf_experiment(c)).dump());

  ExperimentConfig other = c;
  other.seed = c.seed + 1;
  CHECK(csv_of(run_cdf_experiment(other)) != csv);
}

TEST_CASE("realizations are reproducible in isolation") {
  ExperimentConfig c = small(ExperimentKind::Cdf);
  c.realizations = 3;
  c.schemes = {Scheme::LocalTMMSE};
  const ResultTable all = run_experiment(c);
  ExperimentConfig one = c;
  one.first_realization = 2;
  one.realizations = 1;
  const ResultTable single = run_experiment(one);
  REQUIRE(single.rows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    const ResultRow& a = all.rows[6 + k];
    const ResultRow& b = single.rows[k];
    CHECK(a.realization == 2);
    CHECK(b.realization == 2);
    CHECK(a.rate_bits == b.rate_bits);
    CHECK(a.mse == b.mse);
    CHECK(a.p_mw == b.p_mw);
  }
  CHECK(realization_seed(1, 2) != realization_seed(1, 3));
  CHECK(realization_seed(1, 2) != realization_seed(2, 2));
}

TEST_CASE("snr sweep rows") {
  ExperimentConfig c = small(ExperimentKind::SnrSweep);
  c.realizations = 1;
  c.snr_db = {0.0, 20.0};
  c.cases = {{"a", 0.0, 0.0}, {"b", 0.0, 0.2}};
  const ResultTable t = run_snr_sweep(c);
  CHECK(t.rows.size() == 2 * 2 * c.schemes.size() * 3);
  for (const auto& r : t.rows) {
    REQUIRE(r.snr_db.has_value());
    CHECK(r.rate_bits >= 0.0);
  }
  CHECK(t.rows.front().experiment == "snr-sweep-a");
  CHECK(t.rows.back().experiment == "snr-sweep-b");
  CHECK(t.metadata["per_user_power"].size() == 4);
  const double p0 = t.metadata["per_user_power"][0]["P_mw"].get<double>();
  const double p1 = t.metadata["per_user_power"][1]["P_mw"].get<double>();
  CHECK(p1 / p0 == doctest::Approx(100.0));

  const std::string csv = csv_of(t);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.rfind("snr-sweep-a,unidirectional-tmmse,0,0,0,", 0) == 0);
}

TEST_CASE("local comparison rows") {
  ExperimentConfig c = small(ExperimentKind::LocalCompare);
  c.realizations = 1;
  c.m_res = 1000;
  const ResultTable t = run_local_comparison(c);
  CHECK(t.rows.size() == c.kappa.size() * c.schemes.size() * 3);
  CHECK(t.residuals.size() == c.kappa.size() * c.schemes.size());
  for (const auto& r : t.rows) CHECK(r.rate_bits >= 0.0);
  CHECK(t.rows.front().kappa == 0.0);
  CHECK(t.rows.back().kappa == 1.0);
  const nlohmann::json j = table_json(t);
  CHECK(j["rows"].size() == t.rows.size());
  CHECK(j["residuals"].size() == t.residuals.size());
  CHECK(j["metadata"]["config"]["experiment"] == "local-compare");
}

TEST_CASE("errors carry experiment context") {
  ExperimentConfig c = small(ExperimentKind::Cdf);
  c.scenario.stripe.N = 2;
  c.scenario.stripe.K = 4;
  c.schemes = {Scheme::SGD};
  try {
    run_experiment(c);
    FAIL("expected UnsupportedScheme");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedScheme);
    const std::string what = e.what();
    CHECK(what.find("realization 0") != std::string::npos);
    CHECK(what.find("scheme sgd") != std::string::npos);
  }
}
