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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "teamprec/errors.hpp"
#include "teamprec/experiment.hpp"
#include "teamprec/linalg.hpp"

using namespace teamprec;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

CMatrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {n(gen), n(gen)};
  return m;
}

bool report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
  return pass;
}

int selftest() {
  bool ok = true;
  std::mt19937_64 gen(2026);

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    CMatrix a = random_matrix(gen, 6, 6);
    a = a * a.adjoint() + CMatrix::Identity(6, 6);
    const CMatrix b = random_matrix(gen, 6, 2);
    CMatrix d = random_matrix(gen, 2, 2);
    d = d * d.adjoint() + CMatrix::Identity(2, 2);
    const CMatrix c = b.adjoint();
    const CMatrix direct = linalg::inverse(a + b * d * c);
    worst = std::max(worst, (linalg::woodbury_inverse(a, b, d, c) - direct).norm() / direct.norm());
  }
  std::ostringstream os;
  os << "max rel err " << worst;
  ok &= report("woodbury", worst <= 1e-10, os.str());

  NetworkScenario s = iid_scenario(4, 2, 3, 10.0);
  s.epsilon = 0.2;
  worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const ChannelDraw d = draw_channel(s, {7, Stream::Evaluation, i});
    const CMatrix direct = centralized_mmse_direct(d, s.P).T;
    worst = std::max(worst, (centralized_mmse_recursive(d, s.P).T - direct).norm() / direct.norm());
  }
  os.str("");
  os << "max rel err " << worst;
  ok &= report("recursive-centralized", worst <= 1e-9, os.str());

  const NetworkScenario small = iid_scenario(3, 1, 2, 10.0);
  const PrecoderRule rule = PrecoderRule::prepare(small, Scheme::UnidirectionalTMMSE, {2000, 3});
  const RateReport r = evaluate_rates("unidirectional-tmmse", estimate_moments(small, rule, 2000, 3), small);
  double gap = 0.0;
  for (int k = 0; k < r.K(); ++k) gap = std::max(gap, std::abs(r.rate(k) - std::log2(1.0 + r.sinr(k))));
  os.str("");
  os << "max rate gap " << gap << ", power " << r.radiated_power << " / " << r.p_sum;
  ok &= report("duality", gap <= 1e-6 && std::abs(r.radiated_power - r.p_sum) <= 1e-6 * r.p_sum, os.str());

  ExperimentConfig c = default_config(ExperimentKind::Cdf);
  c.realizations = 1;
  c.m_stats = 1000;
  c.m_eval = 1000;
  std::ostringstream first;
  std::ostringstream second;
  write_csv(first, run_experiment(c));
  write_csv(second, run_experiment(c));
  ok &= report("determinism", first.str() == second.str(), std::to_string(first.str().size()) + " bytes");
  return ok ? 0 : kExitNumerical;
}

void apply_paper_scale(ExperimentConfig& c) {
  c.scenario.stripe.L = 30;
  c.scenario.stripe.K = 7;
  c.scenario.stripe.N = c.kind == ExperimentKind::Cdf ? 2 : 1;
}

int run(ExperimentKind kind, const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
        bool paper_scale) {
  ExperimentConfig c;
  if (config_path.empty()) {
    c = default_config(kind, paper_scale);
  } else {
    c = load_config(config_path);
    if (c.kind != kind) {
      throw Error(ErrorKind::InvalidArgument, "config describes experiment '" + std::string(to_string(c.kind)) +
                                                  "', not '" + std::string(to_string(kind)) + "'");
    }
    if (paper_scale) apply_paper_scale(c);
  }
  if (seed) c.seed = *seed;
  if (!out.empty()) c.output_path = out;
  c.validate();

  const ResultTable table = run_experiment(c);
  std::ofstream file;
  if (!c.output_path.empty()) {
    file.open(c.output_path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write '" + c.output_path + "'");
  }
  std::ostream& os = c.output_path.empty() ? std::cout : file;
  if (c.output_format == "json") {
    os << table_json(table).dump(2) << '\n';
  } else {
    write_csv(os, table);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team MMSE precoding experiments for cell-free networks with distributed CSIT"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::uint64_t seed_value = 0;
  bool paper_scale = false;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides the config)");
  app.add_option("--config", config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output file (default: stdout)");
  app.add_flag("--paper-scale", paper_scale, "L = 30, K = 7 (N = 2 for the CDF study)");

  app.add_subcommand("cdf", "Per-user rates over random user placements")->fallthrough();
  auto* sweep = app.add_subcommand("snr-sweep", "Rate versus SNR for the sequential schemes")->fallthrough();
  auto* local = app.add_subcommand("local-compare", "Local precoders under Rayleigh and Ricean fading")->fallthrough();
  auto* self = app.add_subcommand("selftest", "Quick numerical self checks")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (self->parsed()) return selftest();
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    ExperimentKind kind = ExperimentKind::Cdf;
    if (sweep->parsed()) kind = ExperimentKind::SnrSweep;
    if (local->parsed()) kind = ExperimentKind::LocalCompare;
    return run(kind, config_path, out, seed, paper_scale);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_config_error() ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
