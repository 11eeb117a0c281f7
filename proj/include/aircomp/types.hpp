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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace aircomp {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

//! Converts a power level from dBm to Watts: 10^((p - 30)/10).
inline double dbm_to_watts(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

//! Converts a power level from Watts to dBm.
inline double watts_to_dbm(double watts) {
  return 10.0 * std::log10(watts) + 30.0;
}

//! Converts a power ratio from dB to linear scale.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

//! Static problem description: dimensions, power budgets, noise powers and
//! message variances. All powers are stored in Watts; dBm only appears at the
//! CLI/config boundary.
struct SystemConfig {
  int num_wds = 0;             // K
  int num_relays = 0;          // M
  RVector message_variance;    // per-WD message power (dimensionless), length K
  RVector wd_power_budget;     // per-WD transmit budget [W], length K
  RVector relay_power_budget;  // per-relay transmit budget [W], length M
  RVector relay_noise_power;   // per-relay receiver noise [W], length M
  double fc_noise_power = 0.0; // fusion-center receiver noise [W]

  //! Convenience builder with identical per-WD and per-relay parameters.
  static SystemConfig uniform(int num_wds, int num_relays,
                              double message_variance, double wd_power_watts,
                              double relay_power_watts,
                              double relay_noise_watts,
                              double fc_noise_watts) {
    SystemConfig cfg;
    cfg.num_wds = num_wds;
    cfg.num_relays = num_relays;
    cfg.message_variance = RVector::Constant(num_wds, message_variance);
    cfg.wd_power_budget = RVector::Constant(num_wds, wd_power_watts);
    cfg.relay_power_budget = RVector::Constant(num_relays, relay_power_watts);
    cfg.relay_noise_power = RVector::Constant(num_relays, relay_noise_watts);
    cfg.fc_noise_power = fc_noise_watts;
    return cfg;
  }
};

//! Node placement and large-scale fading parameters. Distances are in meters
//! and must not be below the one-meter reference distance.
struct ChannelGeometry {
  RMatrix wd_relay_distance;       // d(k, m), K x M [m]
  RVector relay_fc_distance;       // per-relay distance to the fusion center [m]
  double reference_pathloss = 1.0; // linear-scale path loss at one meter
  double pathloss_exponent = 2.0;

  static ChannelGeometry uniform(int num_wds, int num_relays,
                                 double wd_relay_distance_m,
                                 double relay_fc_distance_m,
                                 double reference_pathloss_linear,
                                 double pathloss_exponent) {
    ChannelGeometry geom;
    geom.wd_relay_distance =
        RMatrix::Constant(num_wds, num_relays, wd_relay_distance_m);
    geom.relay_fc_distance =
        RVector::Constant(num_relays, relay_fc_distance_m);
    geom.reference_pathloss = reference_pathloss_linear;
    geom.pathloss_exponent = pathloss_exponent;
    return geom;
  }
};

//! One draw of all complex channel gains. wd_relay_gains(m, k) is the gain
//! from WD k to relay m; column k stacks WD k's gains to all relays.
struct ChannelRealization {
  CMatrix wd_relay_gains; // H, M x K
  CVector relay_fc_gains; // g, length M

  int num_wds() const { return static_cast<int>(wd_relay_gains.cols()); }
  int num_relays() const { return static_cast<int>(wd_relay_gains.rows()); }
};

//! A full candidate solution: WD transmit coefficients, relay forwarding
//! coefficients and the fusion-center de-noising factor. Feasibility against
//! the power budgets is checked by check_feasibility(), never assumed.
struct TransmitDesign {
  CVector wd_coeffs;    // alpha, length K
  CVector relay_coeffs; // beta, length M
  double denoise = 1.0; // eta > 0
};

//! The analytic computation-error value split into its two components.
//! total == (misalignment + noise_induced) / K^2.
struct MseBreakdown {
  double misalignment = 0.0;
  double noise_induced = 0.0;
  double total = 0.0;
};

//! Validates all type invariants of a configuration/geometry pair.
//! Throws std::invalid_argument describing the first violated invariant.
inline void validate_config(const SystemConfig& cfg,
                            const ChannelGeometry& geom) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid config: " + msg);
  };
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  if (K < 1) fail("num_wds must be >= 1");
  if (M < 1) fail("num_relays must be >= 1");
  if (cfg.message_variance.size() != K)
    fail("message_variance must have length K");
  if (cfg.wd_power_budget.size() != K)
    fail("wd_power_budget must have length K");
  if (cfg.relay_power_budget.size() != M)
    fail("relay_power_budget must have length M");
  if (cfg.relay_noise_power.size() != M)
    fail("relay_noise_power must have length M");
  for (int k = 0; k < K; ++k) {
    if (!(cfg.message_variance[k] > 0.0))
      fail("message_variance must be strictly positive");
    if (!(cfg.wd_power_budget[k] > 0.0))
      fail("wd_power_budget must be strictly positive");
  }
  for (int m = 0; m < M; ++m) {
    if (!(cfg.relay_power_budget[m] > 0.0))
      fail("relay_power_budget must be strictly positive");
    if (!(cfg.relay_noise_power[m] > 0.0))
      fail("relay_noise_power must be strictly positive");
  }
  if (!(cfg.fc_noise_power > 0.0))
    fail("fc_noise_power must be strictly positive");

  if (geom.wd_relay_distance.rows() != K || geom.wd_relay_distance.cols() != M)
    fail("wd_relay_distance must be K x M");
  if (geom.relay_fc_distance.size() != M)
    fail("relay_fc_distance must have length M");
  if (geom.wd_relay_distance.minCoeff() < 1.0 ||
      geom.relay_fc_distance.minCoeff() < 1.0)
    fail("distances must be >= 1 m (reference distance)");
  if (!(geom.reference_pathloss > 0.0) || geom.reference_pathloss > 1.0)
    fail("reference_pathloss must be in (0, 1]");
  if (!(geom.pathloss_exponent > 0.0))
    fail("pathloss_exponent must be > 0");
}

//! Per-constraint power slack of a candidate design. Slacks are reported in
//! Watts; negative slack means the corresponding budget is exceeded.
struct FeasibilityReport {
  RVector wd_slack;    // P_k - |alpha_k|^2 delta_k^2, length K
  RVector relay_slack; // P_Rm - |beta_m|^2 (sum_k |alpha_k h_mk|^2 delta_k^2 + sigma_m^2)
  bool feasible = false;
};

//! Evaluates the WD and relay power constraints for a design. Never throws on
//! infeasible designs; `feasible` holds iff every slack >= -rel_tol * budget.
inline FeasibilityReport check_feasibility(const SystemConfig& cfg,
                                           const ChannelRealization& chan,
                                           const TransmitDesign& design,
                                           double rel_tol = 1e-9) {
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  FeasibilityReport report;
  report.wd_slack.resize(K);
  report.relay_slack.resize(M);
  report.feasible = true;
  for (int k = 0; k < K; ++k) {
    const double used =
        std::norm(design.wd_coeffs[k]) * cfg.message_variance[k];
    report.wd_slack[k] = cfg.wd_power_budget[k] - used;
    if (report.wd_slack[k] < -rel_tol * cfg.wd_power_budget[k])
      report.feasible = false;
  }
  for (int m = 0; m < M; ++m) {
    double received = cfg.relay_noise_power[m];
    for (int k = 0; k < K; ++k) {
      received += std::norm(design.wd_coeffs[k]) *
                  std::norm(chan.wd_relay_gains(m, k)) *
                  cfg.message_variance[k];
    }
    const double used = std::norm(design.relay_coeffs[m]) * received;
    report.relay_slack[m] = cfg.relay_power_budget[m] - used;
    if (report.relay_slack[m] < -rel_tol * cfg.relay_power_budget[m])
      report.feasible = false;
  }
  return report;
}

} // namespace aircomp
