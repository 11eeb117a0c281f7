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

#include <catch2/catch_amalgamated.hpp>

#include "aircomp/oracle.hpp"
#include "aircomp/relay_update.hpp"
#include "support/instances.hpp"

using namespace aircomp;
using Catch::Approx;

namespace {

double objective_16a(const SystemConfig& cfg, const ChannelRealization& chan,
                     const CVector& alpha, const CVector& beta, double eta) {
  TransmitDesign design{alpha, beta, eta};
  return objective_value(cfg, chan, design).unscaled;
}

ChannelRealization unit_channel(int M, int K) {
  ChannelRealization chan;
  chan.wd_relay_gains = CMatrix::Constant(M, K, cdouble{1.0, 0.0});
  chan.relay_fc_gains = CVector::Constant(M, cdouble{1.0, 0.0});
  return chan;
}

} // namespace

TEST_CASE("relay budget caps") {
  SECTION("silent WDs leave the noise-only cap") {
    auto cfg = SystemConfig::uniform(1, 1, 1.0, 1.0, 2.0, 1.0, 0.1);
    const auto chan = unit_channel(1, 1);
    const RVector caps = relay_budget_caps(cfg, chan, CVector::Zero(1));
    CHECK(caps[0] == Approx(2.0).epsilon(1e-15));
  }
  SECTION("unit link splits the budget between signal and noise") {
    auto cfg = SystemConfig::uniform(1, 1, 1.0, 1.0, 2.0, 1.0, 0.1);
    const auto chan = unit_channel(1, 1);
    const RVector caps =
        relay_budget_caps(cfg, chan, CVector::Constant(1, cdouble{1.0, 0.0}));
    CHECK(caps[0] == Approx(1.0).epsilon(1e-15));
  }
  SECTION("scaling the WD coefficient scales its power term") {
    const auto inst = testsupport::battery_instance(3);
    const RVector caps =
        relay_budget_caps(inst.cfg, inst.chan, inst.design.wd_coeffs);
    CVector doubled = inst.design.wd_coeffs * 2.0;
    const RVector caps2 = relay_budget_caps(inst.cfg, inst.chan, doubled);
    for (int m = 0; m < inst.cfg.num_relays; ++m) {
      double signal = 0.0;
      for (int k = 0; k < inst.cfg.num_wds; ++k)
        signal += std::norm(inst.design.wd_coeffs[k]) *
                  std::norm(inst.chan.wd_relay_gains(m, k)) *
                  inst.cfg.message_variance[k];
      const double expected = inst.cfg.relay_power_budget[m] /
                              (4.0 * signal + inst.cfg.relay_noise_power[m]);
      CHECK(caps2[m] == Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("unconstrained candidate") {
  SECTION("scalar link halves the gain at unit blends") {
    auto cfg = SystemConfig::uniform(1, 1, 1.0, 1.0, 1.0, 1.0, 0.1);
    const auto chan = unit_channel(1, 1);
    const CVector beta_hat =
        mmse_candidate(cfg, chan, CVector::Constant(1, cdouble{1.0, 0.0}), 1.0);
    CHECK(std::abs(beta_hat[0] - cdouble{0.5, 0.0}) <= 1e-15);
  }
  SECTION("silent WDs give a zero candidate") {
    const auto inst = testsupport::battery_instance(5);
    const CVector beta_hat = mmse_candidate(
        inst.cfg, inst.chan, CVector::Zero(inst.cfg.num_wds), 1.0);
    CHECK(beta_hat.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("the candidate is proportional to the de-noising factor") {
    const auto inst = testsupport::battery_instance(6);
    const CVector at_eta =
        mmse_candidate(inst.cfg, inst.chan, inst.design.wd_coeffs, 0.75);
    const CVector at_2eta =
        mmse_candidate(inst.cfg, inst.chan, inst.design.wd_coeffs, 1.5);
    for (int m = 0; m < inst.cfg.num_relays; ++m)
      CHECK(at_2eta[m] == 2.0 * at_eta[m]); // bit-exact for a 2x factor
  }
  SECTION("stationarity at the candidate, by finite differences") {
    for (int index : {1, 4, 10}) {
      const auto inst = testsupport::battery_instance(index);
      const double eta = inst.design.denoise;
      const CVector beta_hat =
          mmse_candidate(inst.cfg, inst.chan, inst.design.wd_coeffs, eta);
      auto objective = [&](const RVector& x) {
        return objective_16a(inst.cfg, inst.chan, inst.design.wd_coeffs,
                             real_to_complex(x), eta);
      };
      const RVector grad_at_candidate =
          fd_gradient(objective, complex_to_real(beta_hat), 1e-6);
      const RVector grad_at_zero = fd_gradient(
          objective, RVector::Zero(2 * inst.cfg.num_relays), 1e-6);
      INFO("battery instance " << index);
      CHECK(grad_at_candidate.norm() <= 1e-4 * grad_at_zero.norm());
    }
  }
  SECTION("a relay with no FC channel stays silent") {
    auto cfg = SystemConfig::uniform(2, 2, 1.0, 1.0, 1.0, 0.3, 0.1);
    auto geom = ChannelGeometry::uniform(2, 2, 2.0, 2.0, 0.9, 2.0);
    auto chan = draw_channels(cfg, geom, 8);
    chan.relay_fc_gains[1] = 0.0;
    CVector alpha(2);
    alpha << cdouble{0.5, 0.1}, cdouble{-0.3, 0.4};
    const CVector beta_hat = mmse_candidate(cfg, chan, alpha, 1.0);
    CHECK(beta_hat[1] == cdouble{0.0, 0.0});
    // The live coordinate is still stationary for the reduced problem.
    auto objective = [&](const RVector& x) {
      CVector beta(2);
      beta << cdouble{x[0], x[1]}, cdouble{0.0, 0.0};
      return objective_16a(cfg, chan, alpha, beta, 1.0);
    };
    RVector live(2);
    live << beta_hat[0].real(), beta_hat[0].imag();
    CHECK(fd_gradient(objective, live, 1e-6).norm() <=
          1e-6 * fd_gradient(objective, RVector::Zero(2), 1e-6).norm() + 1e-9);
  }
}

TEST_CASE("projection onto the magnitude caps") {
  SECTION("interior points pass through") {
    const CVector beta = project_relay(CVector::Constant(1, cdouble{0.5, 0.0}),
                                       RVector::Constant(1, 1.0));
    CHECK(beta[0] == cdouble{0.5, 0.0});
  }
  SECTION("real overshoot clips to the radius") {
    const CVector beta = project_relay(CVector::Constant(1, cdouble{0.5, 0.0}),
                                       RVector::Constant(1, 0.09));
    CHECK(beta[0].real() == Approx(0.3).epsilon(1e-15));
    CHECK(beta[0].imag() == 0.0);
  }
  SECTION("complex overshoot keeps its phase") {
    const CVector beta = project_relay(CVector::Constant(1, cdouble{0.3, 0.4}),
                                       RVector::Constant(1, 0.04));
    CHECK(beta[0].real() == Approx(0.12).epsilon(1e-12));
    CHECK(beta[0].imag() == Approx(0.16).epsilon(1e-12));
  }
  SECTION("nonpositive caps are rejected") {
    CHECK_THROWS_AS(project_relay(CVector::Zero(1), RVector::Zero(1)),
                    std::invalid_argument);
  }
  SECTION("the magnitude clip is closer than the vector-norm rule") {
    CVector beta_hat(2);
    beta_hat << cdouble{0.6, 0.0}, cdouble{0.1, 0.0};
    RVector caps(2);
    caps << 0.25, 1.0;
    const CVector clip =
        project_relay(beta_hat, caps, RelayProjection::MagnitudeClip);
    const CVector scaled =
        project_relay(beta_hat, caps, RelayProjection::VectorNormScaled);
    CHECK(std::abs(clip[0]) == Approx(0.5).epsilon(1e-15));
    // The compatibility rule lands strictly inside the cap instead of on it.
    CHECK(std::abs(scaled[0]) < 0.5);
    CHECK((clip - beta_hat).norm() <= (scaled - beta_hat).norm());
  }
}

TEST_CASE("single-relay block update equals the analytic disk optimum") {
  for (int index : {0, 3, 6, 9}) { // M = 1 battery instances
    const auto inst = testsupport::battery_instance(index);
    if (inst.cfg.num_relays != 1) continue;
    const double eta = inst.design.denoise;
    const auto result = solve_relay_block(inst.cfg, inst.chan,
                                          inst.design.wd_coeffs, eta);
    // Scalar closed form: phase from the conjugated coupling, magnitude the
    // clipped ratio of aligned signal to total received power.
    cdouble coupling = 0.0;
    double power = std::norm(inst.chan.relay_fc_gains[0]) *
                   inst.cfg.relay_noise_power[0];
    for (int k = 0; k < inst.cfg.num_wds; ++k) {
      const cdouble v = inst.design.wd_coeffs[k] *
                        inst.chan.relay_fc_gains[0] *
                        inst.chan.wd_relay_gains(0, k);
      coupling += inst.cfg.message_variance[k] * std::conj(v);
      power += inst.cfg.message_variance[k] * std::norm(v);
    }
    const RVector caps =
        relay_budget_caps(inst.cfg, inst.chan, inst.design.wd_coeffs);
    const double magnitude =
        std::min(eta * std::abs(coupling) / power, std::sqrt(caps[0]));
    const cdouble expected =
        coupling == cdouble{0.0, 0.0}
            ? cdouble{0.0, 0.0}
            : std::polar(magnitude, std::arg(coupling));
    INFO("battery instance " << index);
    CHECK(std::abs(result.beta[0] - expected) <=
          1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("huge caps make the candidate itself optimal") {
  auto inst = testsupport::battery_instance(7);
  inst.cfg.relay_power_budget.array() += 1e9;
  const double eta = inst.design.denoise;
  const CVector beta_hat =
      mmse_candidate(inst.cfg, inst.chan, inst.design.wd_coeffs, eta);
  const auto result =
      solve_relay_block(inst.cfg, inst.chan, inst.design.wd_coeffs, eta);
  CHECK((result.beta - beta_hat).norm() <= 1e-8 * (1.0 + beta_hat.norm()));
}

TEST_CASE("battery: relay block matches the projected-gradient oracle") {
  for (int index = 0; index < 10; ++index) {
    const auto inst = testsupport::battery_instance(index);
    const double eta = inst.design.denoise;
    const auto block = solve_relay_block(inst.cfg, inst.chan,
                                         inst.design.wd_coeffs, eta);
    const auto pg = pg_solve_relay(inst.cfg, inst.chan,
                                   inst.design.wd_coeffs, eta, 1e-9);
    const double block_obj = objective_16a(inst.cfg, inst.chan,
                                           inst.design.wd_coeffs,
                                           block.beta, eta);
    INFO("battery instance " << index);
    REQUIRE(pg.converged);
    CHECK(std::abs(block_obj - pg.objective) <=
          1e-6 * std::max(block_obj, pg.objective));
  }
}

TEST_CASE("battery: returned coefficients are feasible and descending") {
  for (int index = 0; index < 12; ++index) {
    const auto inst = testsupport::battery_instance(index);
    const double eta = inst.design.denoise;
    const double before = objective_16a(inst.cfg, inst.chan,
                                        inst.design.wd_coeffs,
                                        inst.design.relay_coeffs, eta);
    const auto block =
        solve_relay_block(inst.cfg, inst.chan, inst.design.wd_coeffs, eta,
                          inst.design.relay_coeffs);
    const double after = objective_16a(inst.cfg, inst.chan,
                                       inst.design.wd_coeffs, block.beta, eta);
    INFO("battery instance " << index);
    CHECK(after <= before + 1e-12);
    TransmitDesign design{inst.design.wd_coeffs, block.beta, eta};
    CHECK(check_feasibility(inst.cfg, inst.chan, design).feasible);
  }
}

TEST_CASE("coupled two-relay instance with binding caps stays certified") {
  auto cfg = SystemConfig::uniform(3, 2, 1.0, 2.0, 0.02, 0.05, 0.05);
  auto geom = ChannelGeometry::uniform(3, 2, 1.5, 1.5, 0.9, 2.0);
  const auto chan = draw_channels(cfg, geom, 21);
  CVector alpha(3);
  alpha << cdouble{0.8, 0.1}, cdouble{-0.4, 0.6}, cdouble{0.2, -0.7};
  const double eta = 1.0;

  const RVector caps = relay_budget_caps(cfg, chan, alpha);
  const CVector beta_hat = mmse_candidate(cfg, chan, alpha, eta);
  bool binding = false;
  for (int m = 0; m < 2; ++m)
    binding = binding || std::norm(beta_hat[m]) > caps[m];
  REQUIRE(binding); // the tiny relay budgets force the clip

  const auto block = solve_relay_block(cfg, chan, alpha, eta);
  const auto pg = pg_solve_relay(cfg, chan, alpha, eta, 1e-10);
  const double block_obj = objective_16a(cfg, chan, alpha, block.beta, eta);
  const double clip_obj = objective_16a(
      cfg, chan, alpha, project_relay(beta_hat, caps), eta);
  CHECK(std::abs(block_obj - pg.objective) <=
        1e-6 * std::max(block_obj, pg.objective));
  CHECK(block_obj <= clip_obj + 1e-12); // refinement never loses to the clip
}
