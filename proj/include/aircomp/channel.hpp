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

#include <cstdint>
#include <random>

#include "aircomp/types.hpp"

namespace aircomp {

//! Deterministic circularly-symmetric complex Gaussian source.
//!
//! Draws CN(0,1) samples via Box-Muller over mt19937_64 uniforms instead of
//! std::normal_distribution, whose output is implementation-defined. The same
//! seed therefore reproduces the same samples bit-exactly on any platform.
//! Real and imaginary parts are independent N(0, 1/2).
class ComplexNormalRng {
public:
  explicit ComplexNormalRng(std::uint64_t seed) : gen_(seed) {}

  //! One CN(0,1) draw; consumes exactly two 64-bit engine outputs.
  cdouble operator()() {
    const double u1 = unit_positive();
    const double u2 = unit_half_open();
    const double radius = std::sqrt(-std::log(u1)); // |z| for CN(0,1)
    const double angle = 2.0 * kPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  //! Uniform draw in [0, 1).
  double unit_half_open() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

private:
  // Uniform in (0, 1]; keeps log() finite.
  double unit_positive() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
};

//! Draws one distance-dependent Rayleigh fading realization.
//!
//! Each gain is sqrt(Omega0 * d^-kappa) * u with u ~ CN(0,1), so the mean
//! squared gain equals the large-scale path loss Omega0 * d^-kappa. Draw
//! order is fixed: relay-to-FC gains first, then WD-to-relay gains column by
//! column (relay index fastest). The fixed order makes realizations a pure
//! function of (cfg, geom, seed) and maximizes common-random-number overlap
//! when sweeping the number of WDs.
inline ChannelRealization draw_channels(const SystemConfig& cfg,
                                        const ChannelGeometry& geom,
                                        ComplexNormalRng& rng) {
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  ChannelRealization chan;
  chan.relay_fc_gains.resize(M);
  chan.wd_relay_gains.resize(M, K);
  const double omega0 = geom.reference_pathloss;
  const double kappa = geom.pathloss_exponent;
  for (int m = 0; m < M; ++m) {
    const double pathloss =
        omega0 * std::pow(geom.relay_fc_distance[m], -kappa);
    chan.relay_fc_gains[m] = std::sqrt(pathloss) * rng();
  }
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      const double pathloss =
          omega0 * std::pow(geom.wd_relay_distance(k, m), -kappa);
      chan.wd_relay_gains(m, k) = std::sqrt(pathloss) * rng();
    }
  }
  return chan;
}

//! Seed-based convenience overload.
inline ChannelRealization draw_channels(const SystemConfig& cfg,
                                        const ChannelGeometry& geom,
                                        std::uint64_t seed) {
  ComplexNormalRng rng(seed);
  return draw_channels(cfg, geom, rng);
}

} // namespace aircomp
