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
// Plain-text key-value configuration files. Schema (one `key = value` per
// line, `#` comments, lists comma-separated, matrix rows semicolon-separated):
//
//   K = 50                      # number of WDs
//   M = 10                      # number of relays
//   message_variance = 1.0      # scalar or K values (default 1.0)
//   wd_power_dbm = 26           # or wd_power_watts; scalar or K values
//   relay_power_dbm = 26        # or relay_power_watts; scalar or M values
//   relay_noise_watts = 1e-9    # scalar or M values
//   fc_noise_watts = 1e-9
//   wd_relay_distance_m = 350   # scalar or K rows of M values
//   relay_fc_distance_m = 150   # scalar or M values
//   pathloss_ref_db = -37       # path loss at the one-meter reference
//   pathloss_exponent = 3.2
//
// Scalars broadcast to the requested dimensions, which is what lets a single
// template drive sweeps over K or M.

#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aircomp/types.hpp"

namespace aircomp {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key +
                                "' has non-numeric value '" + t + "'");
  }
  if (consumed != t.size())
    throw std::invalid_argument("config: key '" + key +
                                "' has trailing characters in '" + t + "'");
  return value;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline std::vector<double> parse_list(const std::string& text,
                                      const std::string& key) {
  std::vector<double> values;
  for (const std::string& item : split(text, ','))
    values.push_back(parse_double(item, key));
  if (values.empty())
    throw std::invalid_argument("config: key '" + key + "' has no values");
  return values;
}

} // namespace detail

//! A scalar-or-list value; scalars broadcast to any requested length.
struct Broadcastable {
  std::vector<double> values{};

  bool is_scalar() const { return values.size() == 1; }

  RVector materialize(int n, const std::string& key) const {
    if (values.empty())
      throw std::invalid_argument("config: key '" + key + "' is missing");
    if (is_scalar()) return RVector::Constant(n, values[0]);
    if (static_cast<int>(values.size()) != n)
      throw std::invalid_argument(
          "config: key '" + key + "' has " + std::to_string(values.size()) +
          " values but " + std::to_string(n) + " are required");
    RVector out(n);
    for (int i = 0; i < n; ++i) out[i] = values[i];
    return out;
  }
};

//! Parsed configuration before dimensions are fixed. instantiate() broadcasts
//! scalars to a concrete (K, M) pair, so a sweep can reuse one template.
struct ConfigTemplate {
  int num_wds = 0;
  int num_relays = 0;
  Broadcastable message_variance{{1.0}};
  Broadcastable wd_power_watts;
  Broadcastable relay_power_watts;
  Broadcastable relay_noise_watts;
  double fc_noise_watts = 0.0;
  std::vector<std::vector<double>> wd_relay_distance_m; // scalar as 1x1
  Broadcastable relay_fc_distance_m;
  double pathloss_ref_db = 0.0;
  double pathloss_exponent = 0.0;

  std::pair<SystemConfig, ChannelGeometry> instantiate(int K, int M) const {
    SystemConfig cfg;
    cfg.num_wds = K;
    cfg.num_relays = M;
    cfg.message_variance = message_variance.materialize(K, "message_variance");
    cfg.wd_power_budget = wd_power_watts.materialize(K, "wd_power");
    cfg.relay_power_budget = relay_power_watts.materialize(M, "relay_power");
    cfg.relay_noise_power =
        relay_noise_watts.materialize(M, "relay_noise_watts");
    cfg.fc_noise_power = fc_noise_watts;

    ChannelGeometry geom;
    if (wd_relay_distance_m.size() == 1 && wd_relay_distance_m[0].size() == 1) {
      geom.wd_relay_distance =
          RMatrix::Constant(K, M, wd_relay_distance_m[0][0]);
    } else {
      if (static_cast<int>(wd_relay_distance_m.size()) != K)
        throw std::invalid_argument(
            "config: wd_relay_distance_m must have K rows (or be a scalar)");
      geom.wd_relay_distance.resize(K, M);
      for (int k = 0; k < K; ++k) {
        if (static_cast<int>(wd_relay_distance_m[k].size()) != M)
          throw std::invalid_argument(
              "config: wd_relay_distance_m rows must each have M values");
        for (int m = 0; m < M; ++m)
          geom.wd_relay_distance(k, m) = wd_relay_distance_m[k][m];
      }
    }
    geom.relay_fc_distance =
        relay_fc_distance_m.materialize(M, "relay_fc_distance_m");
    geom.reference_pathloss = db_to_linear(pathloss_ref_db);
    geom.pathloss_exponent = pathloss_exponent;

    validate_config(cfg, geom);
    return {cfg, geom};
  }

  std::pair<SystemConfig, ChannelGeometry> instantiate() const {
    return instantiate(num_wds, num_relays);
  }
};

//! Parses configuration text. Throws std::invalid_argument on unknown keys,
//! duplicated or conflicting unit keys, malformed numbers, or missing
//! required keys.
inline ConfigTemplate parse_config(const std::string& text) {
  ConfigTemplate tmpl;
  std::optional<int> K, M;
  std::optional<Broadcastable> message_variance;
  std::optional<Broadcastable> wd_power, relay_power, relay_noise;
  std::optional<double> fc_noise, pathloss_ref_db, pathloss_exponent;
  std::optional<std::vector<std::vector<double>>> wd_relay_distance;
  std::optional<Broadcastable> relay_fc_distance;
  bool wd_power_in_dbm = false, relay_power_in_dbm = false;

  std::stringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto equals = line.find('=');
    if (equals == std::string::npos)
      throw std::invalid_argument("config: line " +
                                  std::to_string(line_number) +
                                  " is not of the form 'key = value'");
    const std::string key = detail::trim(line.substr(0, equals));
    const std::string value = detail::trim(line.substr(equals + 1));

    auto set_power = [&](std::optional<Broadcastable>& slot, bool& in_dbm,
                         bool dbm) {
      if (slot.has_value())
        throw std::invalid_argument("config: power for '" + key +
                                    "' specified twice (dBm and Watts keys "
                                    "are mutually exclusive)");
      slot = Broadcastable{detail::parse_list(value, key)};
      in_dbm = dbm;
    };

    if (key == "K" || key == "num_wds") {
      K = static_cast<int>(detail::parse_double(value, key));
    } else if (key == "M" || key == "num_relays") {
      M = static_cast<int>(detail::parse_double(value, key));
    } else if (key == "message_variance") {
      message_variance = Broadcastable{detail::parse_list(value, key)};
    } else if (key == "wd_power_dbm") {
      set_power(wd_power, wd_power_in_dbm, true);
    } else if (key == "wd_power_watts") {
      set_power(wd_power, wd_power_in_dbm, false);
    } else if (key == "relay_power_dbm") {
      set_power(relay_power, relay_power_in_dbm, true);
    } else if (key == "relay_power_watts") {
      set_power(relay_power, relay_power_in_dbm, false);
    } else if (key == "relay_noise_watts") {
      relay_noise = Broadcastable{detail::parse_list(value, key)};
    } else if (key == "fc_noise_watts") {
      fc_noise = detail::parse_double(value, key);
    } else if (key == "wd_relay_distance_m") {
      std::vector<std::vector<double>> rows;
      for (const std::string& row : detail::split(value, ';'))
        rows.push_back(detail::parse_list(row, key));
      wd_relay_distance = std::move(rows);
    } else if (key == "relay_fc_distance_m") {
      relay_fc_distance = Broadcastable{detail::parse_list(value, key)};
    } else if (key == "pathloss_ref_db") {
      pathloss_ref_db = detail::parse_double(value, key);
    } else if (key == "pathloss_exponent") {
      pathloss_exponent = detail::parse_double(value, key);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }

  auto require = [](bool present, const char* what) {
    if (!present)
      throw std::invalid_argument(std::string("config: missing required key ") +
                                  what);
  };
  require(K.has_value(), "'K'");
  require(M.has_value(), "'M'");
  require(wd_power.has_value(), "'wd_power_dbm' or 'wd_power_watts'");
  require(relay_power.has_value(), "'relay_power_dbm' or 'relay_power_watts'");
  require(relay_noise.has_value(), "'relay_noise_watts'");
  require(fc_noise.has_value(), "'fc_noise_watts'");
  require(wd_relay_distance.has_value(), "'wd_relay_distance_m'");
  require(relay_fc_distance.has_value(), "'relay_fc_distance_m'");
  require(pathloss_ref_db.has_value(), "'pathloss_ref_db'");
  require(pathloss_exponent.has_value(), "'pathloss_exponent'");

  tmpl.num_wds = *K;
  tmpl.num_relays = *M;
  if (message_variance.has_value()) tmpl.message_variance = *message_variance;
  tmpl.wd_power_watts = *wd_power;
  tmpl.relay_power_watts = *relay_power;
  if (wd_power_in_dbm)
    for (double& p : tmpl.wd_power_watts.values) p = dbm_to_watts(p);
  if (relay_power_in_dbm)
    for (double& p : tmpl.relay_power_watts.values) p = dbm_to_watts(p);
  tmpl.relay_noise_watts = *relay_noise;
  tmpl.fc_noise_watts = *fc_noise;
  tmpl.wd_relay_distance_m = *wd_relay_distance;
  tmpl.relay_fc_distance_m = *relay_fc_distance;
  tmpl.pathloss_ref_db = *pathloss_ref_db;
  tmpl.pathloss_exponent = *pathloss_exponent;
  if (tmpl.num_wds < 1 || tmpl.num_relays < 1)
    throw std::invalid_argument("config: K and M must be >= 1");
  return tmpl;
}

inline ConfigTemplate load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

} // namespace aircomp
