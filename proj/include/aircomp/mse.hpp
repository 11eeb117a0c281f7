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

#include <cmath>
#include <stdexcept>

#include "aircomp/channel.hpp"
#include "aircomp/types.hpp"

namespace aircomp {

//! Composite end-to-end channel coefficients c_k = sum_m h_mk g_m beta_m:
//! the effective gain from WD k through all relays to the fusion center,
//! before the WD's own coefficient is applied.
inline CVector composite_channels(const ChannelRealization& chan,
                                  const CVector& relay_coeffs) {
  return chan.wd_relay_gains.transpose() *
         chan.relay_fc_gains.cwiseProduct(relay_coeffs);
}

//! Analytic mean squared error of the fusion-center estimate.
//!
//! misalignment  = sum_k |alpha_k c_k / eta - 1|^2 delta_k^2
//! noise_induced = (sum_m |beta_m g_m|^2 sigma_m^2 + sigma_0^2) / eta^2
//! total         = (misalignment + noise_induced) / K^2
//!
//! Throws std::invalid_argument when the de-noising factor is not positive.
inline MseBreakdown evaluate_mse(const SystemConfig& cfg,
                                 const ChannelRealization& chan,
                                 const TransmitDesign& design) {
  if (!(design.denoise > 0.0))
    throw std::invalid_argument("evaluate_mse: de-noising factor must be > 0");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  const double eta = design.denoise;
  const CVector c = composite_channels(chan, design.relay_coeffs);

  double misalignment = 0.0;
  for (int k = 0; k < K; ++k) {
    const cdouble gain = design.wd_coeffs[k] * c[k] / eta;
    misalignment += std::norm(gain - 1.0) * cfg.message_variance[k];
  }
  double forwarded_noise = 0.0;
  for (int m = 0; m < M; ++m) {
    forwarded_noise += std::norm(design.relay_coeffs[m]) *
                       std::norm(chan.relay_fc_gains[m]) *
                       cfg.relay_noise_power[m];
  }
  MseBreakdown out;
  out.misalignment = misalignment;
  out.noise_induced = (forwarded_noise + cfg.fc_noise_power) / (eta * eta);
  out.total =
      (out.misalignment + out.noise_induced) / (double(K) * double(K));
  return out;
}

//! The optimization objective (the K^2-scaled MSE) and the MSE itself.
struct ObjectiveValue {
  double unscaled = 0.0; // misalignment + noise_induced
  double mse = 0.0;      // unscaled / K^2
};

inline ObjectiveValue objective_value(const SystemConfig& cfg,
                                      const ChannelRealization& chan,
                                      const TransmitDesign& design) {
  const MseBreakdown b = evaluate_mse(cfg, chan, design);
  return {b.misalignment + b.noise_induced, b.total};
}

//! Sample mean and standard error of the squared estimation error.
struct EmpiricalMse {
  double mean = 0.0;
  double std_error = 0.0;
  long num_trials = 0;
};

//! Signal-level Monte Carlo estimate of the MSE, used as an oracle for
//! evaluate_mse().
//!
//! Simulates the full two-phase transmission per trial: messages
//! x_k ~ CN(0, delta_k^2), relay receive r_m = sum_k h_mk alpha_k x_k + z_m,
//! relay forward beta_m r_m, fusion-center receive y = sum_m g_m beta_m r_m
//! + z_0, estimate y/(K eta) against the target mean of the x_k. It never
//! reuses the analytic error decomposition.
inline EmpiricalMse empirical_mse(const SystemConfig& cfg,
                                  const ChannelRealization& chan,
                                  const TransmitDesign& design,
                                  long num_trials, ComplexNormalRng& rng) {
  if (num_trials < 1)
    throw std::invalid_argument("empirical_mse: num_trials must be >= 1");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  const double eta = design.denoise;

  // Welford accumulation of mean and variance of the squared error.
  double mean = 0.0;
  double m2 = 0.0;
  CVector x(K);
  for (long t = 0; t < num_trials; ++t) {
    cdouble target = 0.0;
    for (int k = 0; k < K; ++k) {
      x[k] = std::sqrt(cfg.message_variance[k]) * rng();
      target += x[k];
    }
    target /= static_cast<double>(K);

    cdouble received = 0.0;
    for (int m = 0; m < M; ++m) {
      cdouble relay_in = std::sqrt(cfg.relay_noise_power[m]) * rng();
      for (int k = 0; k < K; ++k)
        relay_in += chan.wd_relay_gains(m, k) * design.wd_coeffs[k] * x[k];
      received += chan.relay_fc_gains[m] * design.relay_coeffs[m] * relay_in;
    }
    received += std::sqrt(cfg.fc_noise_power) * rng();

    const cdouble estimate = received / (static_cast<double>(K) * eta);
    const double sq_error = std::norm(estimate - target);
    const double delta = sq_error - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (sq_error - mean);
  }
  EmpiricalMse out;
  out.mean = mean;
  out.num_trials = num_trials;
  if (num_trials > 1) {
    const double variance = m2 / static_cast<double>(num_trials - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(num_trials));
  }
  return out;
}

} // namespace aircomp
