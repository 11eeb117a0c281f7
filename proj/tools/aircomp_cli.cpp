// SPDX-License-Identifier: Apache-2.0
//
// aircomp-relay: two-phase amplify-and-forward relaying for hierarchical
// over-the-air computation
// Copyright (C) 2026 the aircomp-relay authors
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
//
// Experiment CLI: sweeps the number of WDs or relays over seeded Monte Carlo
// channel draws, solves every requested scheme on common random numbers, and
// exports per-realization and aggregate results as CSV or JSON.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aircomp/aircomp.hpp"

namespace {

using namespace aircomp;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (const std::string& item : detail::split(text, ','))
    values.push_back(
        static_cast<int>(detail::parse_double(item, "sweep values")));
  return values;
}

SweepSpec parse_sweep(const std::string& arg, bool paper_scale) {
  SweepSpec sweep;
  std::string variable = arg;
  std::string values;
  const auto equals = arg.find('=');
  if (equals != std::string::npos) {
    variable = arg.substr(0, equals);
    values = arg.substr(equals + 1);
  }
  if (variable == "K")
    sweep.variable = SweepVariable::K;
  else if (variable == "M")
    sweep.variable = SweepVariable::M;
  else
    throw std::invalid_argument("sweep: variable must be K or M, got '" +
                                variable + "'");
  if (!values.empty()) {
    sweep.values = parse_int_list(values);
  } else if (sweep.variable == SweepVariable::K) {
    sweep.values = paper_scale ? std::vector<int>{10, 20, 40, 60, 80, 100}
                               : std::vector<int>{10, 20, 40};
  } else {
    sweep.values = paper_scale ? std::vector<int>{2, 5, 10, 15, 20, 25}
                               : std::vector<int>{2, 5, 10};
  }
  return sweep;
}

std::vector<Scheme> parse_schemes(const std::string& arg) {
  std::vector<Scheme> schemes;
  for (const std::string& item : detail::split(arg, ',')) {
    const auto scheme = scheme_from_name(detail::trim(item));
    if (!scheme.has_value())
      throw std::invalid_argument(
          "schemes: unknown scheme '" + item +
          "' (expected proposed, full-both, full-wd, full-relay)");
    schemes.push_back(*scheme);
  }
  return schemes;
}

void print_summary(const ExperimentResult& result) {
  std::printf("%-12s %6s %14s %14s %7s\n", "scheme", result.sweep_variable.c_str(),
              "mean_mse", "std_error", "count");
  for (const SweepAggregate& a : result.aggregates) {
    std::printf("%-12s %6d %14.6e %14.6e %7d\n", a.scheme.c_str(),
                a.sweep_value, a.mean_mse, a.std_error, a.count);
  }
  // Gain of the proposed scheme over each benchmark, when both are present.
  for (const SweepAggregate& a : result.aggregates) {
    if (a.scheme != scheme_name(Scheme::Proposed)) continue;
    for (const SweepAggregate& b : result.aggregates) {
      if (b.sweep_value != a.sweep_value || b.scheme == a.scheme) continue;
      if (b.mean_mse <= 0.0) continue;
      std::printf("gain over %-12s at %s=%-4d: %6.2f%%\n", b.scheme.c_str(),
                  result.sweep_variable.c_str(), a.sweep_value,
                  100.0 * (b.mean_mse - a.mean_mse) / b.mean_mse);
    }
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo MSE experiments for two-phase AF-relay over-the-air "
      "computation"};
  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file")
      ->required();
  std::string sweep_arg = "K";
  app.add_option("--sweep", sweep_arg,
                 "sweep spec: K=10,20,40 or M=2,5,10 (bare K or M uses "
                 "defaults)");
  int realizations = -1;
  app.add_option("--realizations", realizations,
                 "channel realizations per sweep value (default 200, or 1000 "
                 "with --paper-scale)");
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "base seed; realization i uses seed + i");
  std::string schemes_arg = "proposed,full-both,full-wd,full-relay";
  app.add_option("--schemes", schemes_arg, "comma-separated scheme list");
  double epsilon = 1e-4;
  app.add_option("--epsilon", epsilon,
                 "relative-improvement stopping threshold");
  std::string out_path = "results.csv";
  app.add_option("--out", out_path, "output file");
  std::string format = "csv";
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  bool paper_scale = false;
  app.add_flag("--paper-scale", paper_scale,
               "default sweep values up to K=100 / M=25 with 1000 "
               "realizations");
  CLI11_PARSE(app, argc, argv);

  try {
    const ConfigTemplate tmpl = load_config_file(config_path);
    SweepSpec sweep = parse_sweep(sweep_arg, paper_scale);
    sweep.realizations =
        realizations > 0 ? realizations : (paper_scale ? 1000 : 200);
    sweep.base_seed = seed;
    validate_sweep(sweep);

    HarnessOptions opts;
    opts.schemes = parse_schemes(schemes_arg);
    opts.solver.epsilon = epsilon;
    opts.num_threads = threads;

    const ExperimentResult result = run_sweep(tmpl, sweep, opts);
    export_result(result,
                  format == "csv" ? ExportFormat::Csv : ExportFormat::Json,
                  out_path);
    print_summary(result);
    std::printf("wrote %zu records to %s\n", result.records.size(),
                out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
