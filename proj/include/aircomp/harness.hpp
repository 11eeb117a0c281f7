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

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "aircomp/config.hpp"
#include "aircomp/solver.hpp"

namespace aircomp {

enum class SweepVariable { K, M };

inline const char* sweep_variable_name(SweepVariable v) {
  return v == SweepVariable::K ? "K" : "M";
}

//! One Monte Carlo sweep: vary K or M over the given values, drawing
//! `realizations` seeded channels per value. Seeds are base_seed + index, so
//! all schemes (and, as far as dimensions allow, all sweep values) see common
//! random numbers.
struct SweepSpec {
  SweepVariable variable = SweepVariable::K;
  std::vector<int> values;
  int realizations = 200;
  std::uint64_t base_seed = 1;
};

inline void validate_sweep(const SweepSpec& sweep) {
  if (sweep.values.empty())
    throw std::invalid_argument("sweep: values must be nonempty");
  for (size_t i = 0; i < sweep.values.size(); ++i) {
    if (sweep.values[i] < 1)
      throw std::invalid_argument("sweep: values must be positive");
    if (i > 0 && sweep.values[i] <= sweep.values[i - 1])
      throw std::invalid_argument("sweep: values must be strictly increasing");
  }
  if (sweep.realizations < 1)
    throw std::invalid_argument("sweep: realizations must be >= 1");
}

struct SolveRecord {
  std::string scheme;
  std::string sweep_variable;
  int sweep_value = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double misalignment = 0.0;
  double noise_induced = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;
};

struct SweepAggregate {
  std::string scheme;
  int sweep_value = 0;
  double mean_mse = 0.0;
  double std_error = 0.0;
  int count = 0;
};

struct ExperimentResult {
  std::string sweep_variable;
  std::vector<SolveRecord> records;
  std::vector<SweepAggregate> aggregates;
};

struct HarnessOptions {
  std::vector<Scheme> schemes = {
      Scheme::Proposed, Scheme::FullPowerWdsAndRelays, Scheme::FullPowerWdsOnly,
      Scheme::FullPowerRelaysOnly};
  SolverOptions solver;
  int num_threads = 0; // 0: hardware concurrency
};

//! Runs the sweep. Record order is fixed by (sweep value, realization,
//! scheme) no matter how many worker threads run, so results are a pure
//! function of the template, the sweep and the solver options (wall-clock
//! fields aside). Per-realization solver failures are recorded as
//! non-converged NaN entries, never fatal.
inline ExperimentResult run_sweep(const ConfigTemplate& tmpl,
                                  const SweepSpec& sweep,
                                  const HarnessOptions& opts = {}) {
  validate_sweep(sweep);
  if (opts.schemes.empty())
    throw std::invalid_argument("run_sweep: at least one scheme required");
  ExperimentResult result;
  result.sweep_variable = sweep_variable_name(sweep.variable);
  const int num_schemes = static_cast<int>(opts.schemes.size());
  result.records.resize(sweep.values.size() *
                        static_cast<size_t>(sweep.realizations) * num_schemes);

  unsigned threads = opts.num_threads > 0
                         ? static_cast<unsigned>(opts.num_threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, sweep.realizations);

  for (size_t vi = 0; vi < sweep.values.size(); ++vi) {
    const int value = sweep.values[vi];
    const int K = sweep.variable == SweepVariable::K ? value : tmpl.num_wds;
    const int M = sweep.variable == SweepVariable::M ? value : tmpl.num_relays;
    const auto [cfg, geom] = tmpl.instantiate(K, M);
    const size_t base = vi * sweep.realizations * num_schemes;

    auto worker = [&, base, value](unsigned worker_id) {
      for (int i = static_cast<int>(worker_id); i < sweep.realizations;
           i += static_cast<int>(threads)) {
        const std::uint64_t seed = sweep.base_seed + static_cast<std::uint64_t>(i);
        const ChannelRealization chan = draw_channels(cfg, geom, seed);
        for (int s = 0; s < num_schemes; ++s) {
          SolveRecord& record = result.records[base + i * num_schemes + s];
          record.scheme = scheme_name(opts.schemes[s]);
          record.sweep_variable = result.sweep_variable;
          record.sweep_value = value;
          record.realization = i;
          record.seed = seed;
          SolverOptions solver = opts.solver;
          solver.scheme = opts.schemes[s];
          const auto start = std::chrono::steady_clock::now();
          try {
            const SolveTrace trace = solve(cfg, chan, solver);
            const MseBreakdown& final_mse = trace.mse.back();
            record.mse = final_mse.total;
            record.misalignment = final_mse.misalignment;
            record.noise_induced = final_mse.noise_induced;
            record.iterations = trace.iterations;
            record.converged = trace.converged;
          } catch (const std::exception&) {
            record.mse = std::numeric_limits<double>::quiet_NaN();
            record.misalignment = record.mse;
            record.noise_induced = record.mse;
            record.converged = false;
          }
          record.wall_ms =
              std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - start)
                  .count();
        }
      }
    };
    if (threads <= 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
      for (std::thread& t : pool) t.join();
    }
  }

  // Aggregates in (scheme, value) order; mean over finite entries only.
  for (int s = 0; s < num_schemes; ++s) {
    for (size_t vi = 0; vi < sweep.values.size(); ++vi) {
      SweepAggregate agg;
      agg.scheme = scheme_name(opts.schemes[s]);
      agg.sweep_value = sweep.values[vi];
      double sum = 0.0;
      std::vector<double> samples;
      for (const SolveRecord& r : result.records) {
        if (r.scheme != agg.scheme || r.sweep_value != agg.sweep_value)
          continue;
        if (!std::isfinite(r.mse)) continue;
        samples.push_back(r.mse);
        sum += r.mse;
      }
      agg.count = static_cast<int>(samples.size());
      if (agg.count > 0) {
        agg.mean_mse = sum / agg.count;
        if (agg.count > 1) {
          double ss = 0.0;
          for (double v : samples) ss += (v - agg.mean_mse) * (v - agg.mean_mse);
          agg.std_error = std::sqrt(ss / (agg.count - 1) / agg.count);
        }
      }
      result.aggregates.push_back(std::move(agg));
    }
  }
  return result;
}

namespace detail {

inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

} // namespace detail

inline std::string to_csv(const ExperimentResult& result) {
  std::string out =
      "scheme,sweep_variable,sweep_value,realization,seed,mse,misalignment,"
      "noise_induced,iterations,converged,wall_ms\n";
  for (const SolveRecord& r : result.records) {
    out += r.scheme;
    out += ',';
    out += r.sweep_variable;
    out += ',';
    out += std::to_string(r.sweep_value);
    out += ',';
    out += std::to_string(r.realization);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += detail::format_double(r.mse);
    out += ',';
    out += detail::format_double(r.misalignment);
    out += ',';
    out += detail::format_double(r.noise_induced);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += r.converged ? "true" : "false";
    out += ',';
    out += detail::format_double(r.wall_ms);
    out += '\n';
  }
  return out;
}

inline nlohmann::json experiment_to_json(const ExperimentResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (const SolveRecord& r : result.records) {
    records.push_back({{"scheme", r.scheme},
                       {"sweep_variable", r.sweep_variable},
                       {"sweep_value", r.sweep_value},
                       {"realization", r.realization},
                       {"seed", r.seed},
                       {"mse", r.mse},
                       {"misalignment", r.misalignment},
                       {"noise_induced", r.noise_induced},
                       {"iterations", r.iterations},
                       {"converged", r.converged},
                       {"wall_ms", r.wall_ms}});
  }
  nlohmann::json aggregates = nlohmann::json::array();
  for (const SweepAggregate& a : result.aggregates) {
    aggregates.push_back({{"scheme", a.scheme},
                          {"sweep_value", a.sweep_value},
                          {"mean_mse", a.mean_mse},
                          {"std_error", a.std_error},
                          {"count", a.count}});
  }
  return {{"sweep_variable", result.sweep_variable},
          {"records", records},
          {"aggregates", aggregates}};
}

inline ExperimentResult experiment_from_json(const nlohmann::json& j) {
  ExperimentResult result;
  result.sweep_variable = j.at("sweep_variable").get<std::string>();
  for (const nlohmann::json& r : j.at("records")) {
    SolveRecord record;
    record.scheme = r.at("scheme").get<std::string>();
    record.sweep_variable = r.at("sweep_variable").get<std::string>();
    record.sweep_value = r.at("sweep_value").get<int>();
    record.realization = r.at("realization").get<int>();
    record.seed = r.at("seed").get<std::uint64_t>();
    record.mse = r.at("mse").get<double>();
    record.misalignment = r.at("misalignment").get<double>();
    record.noise_induced = r.at("noise_induced").get<double>();
    record.iterations = r.at("iterations").get<int>();
    record.converged = r.at("converged").get<bool>();
    record.wall_ms = r.at("wall_ms").get<double>();
    result.records.push_back(std::move(record));
  }
  for (const nlohmann::json& a : j.at("aggregates")) {
    SweepAggregate agg;
    agg.scheme = a.at("scheme").get<std::string>();
    agg.sweep_value = a.at("sweep_value").get<int>();
    agg.mean_mse = a.at("mean_mse").get<double>();
    agg.std_error = a.at("std_error").get<double>();
    agg.count = a.at("count").get<int>();
    result.aggregates.push_back(std::move(agg));
  }
  return result;
}

enum class ExportFormat { Csv, Json };

//! Writes the result table to disk. Throws std::runtime_error on I/O failure.
inline void export_result(const ExperimentResult& result, ExportFormat format,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export: cannot open '" + path + "'");
  if (format == ExportFormat::Csv)
    out << to_csv(result);
  else
    out << experiment_to_json(result).dump(2) << '\n';
  if (!out) throw std::runtime_error("export: write to '" + path + "' failed");
}

} // namespace aircomp
