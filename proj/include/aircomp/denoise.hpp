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

#include <stdexcept>

#include "aircomp/mse.hpp"
#include "aircomp/types.hpp"

namespace aircomp {

//! Thrown when a design carries no aligned signal energy, so no positive
//! de-noising factor is optimal. Callers keep their previous factor.
struct DegenerateDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Closed-form optimal de-noising factor for fixed WD and relay coefficients:
//! the ratio of the total received signal-plus-noise power to the real part
//! of the aligned sum-signal amplitude,
//!
//!   eta = (sum_k delta_k^2 |alpha_k c_k|^2 + sum_m |beta_m g_m|^2 sigma_m^2
//!          + sigma_0^2) / Re(sum_k alpha_k delta_k^2 c_k).
//!
//! The squared-error objective is a strictly convex quadratic in 1/eta with
//! leading coefficient equal to the numerator above, so this stationary point
//! is the unique minimizer over eta > 0 whenever the denominator is positive.
//! Only the real part of the cross term enters the objective, which keeps the
//! update valid for designs whose phases are not yet aligned. Throws
//! DegenerateDesignError when the aligned amplitude is not positive
//! (relative tolerance 1e-12 against the sum of term magnitudes).
inline double solve_eta(const SystemConfig& cfg, const ChannelRealization& chan,
                        const CVector& wd_coeffs, const CVector& relay_coeffs) {
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  const CVector c = composite_channels(chan, relay_coeffs);

  double aligned = 0.0;    // Re(sum_k alpha_k delta_k^2 c_k)
  double magnitudes = 0.0; // sum_k delta_k^2 |alpha_k c_k|, scale reference
  double signal_power = 0.0;
  for (int k = 0; k < K; ++k) {
    const cdouble term = wd_coeffs[k] * c[k];
    aligned += cfg.message_variance[k] * term.real();
    magnitudes += cfg.message_variance[k] * std::abs(term);
    signal_power += cfg.message_variance[k] * std::norm(term);
  }
  double noise_power = cfg.fc_noise_power;
  for (int m = 0; m < M; ++m) {
    noise_power += std::norm(relay_coeffs[m]) *
                   std::norm(chan.relay_fc_gains[m]) *
                   cfg.relay_noise_power[m];
  }
  if (!(aligned > 1e-12 * magnitudes) || magnitudes == 0.0)
    throw DegenerateDesignError(
        "degenerate design: no aligned signal energy");
  return (signal_power + noise_power) / aligned;
}

inline double solve_eta(const SystemConfig& cfg, const ChannelRealization& chan,
                        const TransmitDesign& design) {
  return solve_eta(cfg, chan, design.wd_coeffs, design.relay_coeffs);
}

} // namespace aircomp
