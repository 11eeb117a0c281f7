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

#include "aircomp/denoise.hpp"
#include "aircomp/oracle.hpp"
#include "support/instances.hpp"

using namespace aircomp;
using Catch::Approx;

namespace {

ChannelRealization unit_channel(int M, int K) {
  ChannelRealization chan;
  chan.wd_relay_gains = CMatrix::Constant(M, K, cdouble{1.0, 0.0});
  chan.relay_fc_gains = CVector::Constant(M, cdouble{1.0, 0.0});
  return chan;
}

} // namespace

TEST_CASE("worked single-link example") {
  auto cfg = SystemConfig::uniform(1, 1, 1.0, 10.0, 10.0, 0.1, 0.1);
  const auto chan = unit_channel(1, 1);
  const CVector alpha = CVector::Constant(1, cdouble{1.0, 0.0});
  const CVector beta = CVector::Constant(1, cdouble{1.0, 0.0});
  CHECK(solve_eta(cfg, chan, alpha, beta) == Approx(1.2).epsilon(1e-15));
}

TEST_CASE("noise-free invertible link drives the error to zero") {
  auto cfg = SystemConfig::uniform(1, 1, 1.0, 10.0, 10.0, 1e-30, 1e-30);
  const auto chan = unit_channel(1, 1);
  TransmitDesign design{CVector::Constant(1, cdouble{1.0, 0.0}),
                        CVector::Constant(1, cdouble{1.0, 0.0}), 1.0};
  design.denoise = solve_eta(cfg, chan, design);
  CHECK(design.denoise == Approx(1.0).epsilon(1e-12));
  CHECK(evaluate_mse(cfg, chan, design).misalignment < 1e-10);
}

TEST_CASE("stationarity: the scalar objective is flat at the returned factor") {
  for (int index : {0, 5, 9, 16}) {
    const auto inst = testsupport::battery_instance(index);
    const double eta = solve_eta(inst.cfg, inst.chan, inst.design);
    auto objective = [&](const RVector& x) {
      TransmitDesign d = inst.design;
      d.denoise = x[0];
      return objective_value(inst.cfg, inst.chan, d).unscaled;
    };
    RVector point(1);
    point[0] = eta;
    const double value = objective(point);
    const RVector grad = fd_gradient(objective, point, eta * 1e-6);
    INFO("battery instance " << index);
    CHECK(std::abs(grad[0]) <= 1e-6 * value / eta);
  }
}

TEST_CASE("the update never increases the error") {
  for (int index = 0; index < 12; ++index) {
    const auto inst = testsupport::battery_instance(index);
    const double before =
        objective_value(inst.cfg, inst.chan, inst.design).unscaled;
    TransmitDesign updated = inst.design;
    updated.denoise = solve_eta(inst.cfg, inst.chan, inst.design);
    const double after =
        objective_value(inst.cfg, inst.chan, updated).unscaled;
    CHECK(after <= before + 1e-12);
    CHECK(updated.denoise > 0.0);
  }
}

TEST_CASE("grid search brackets the closed form") {
  const auto inst = testsupport::battery_instance(7);
  const double eta = solve_eta(inst.cfg, inst.chan, inst.design);
  const auto grid = grid_search_scalar_eta(
      inst.cfg, inst.chan, inst.design.wd_coeffs, inst.design.relay_coeffs,
      eta / 3.0, eta * 3.0, 10001);
  const double step = std::log(9.0) / 10000.0;
  CHECK(std::abs(std::log(grid.best_eta / eta)) <= step * (1.0 + 1e-9));
}

TEST_CASE("degenerate designs are rejected") {
  auto cfg = SystemConfig::uniform(1, 1, 1.0, 10.0, 10.0, 0.1, 0.1);
  const auto chan = unit_channel(1, 1);
  const CVector beta = CVector::Constant(1, cdouble{1.0, 0.0});

  SECTION("silent WDs carry no aligned energy") {
    CHECK_THROWS_AS(solve_eta(cfg, chan, CVector::Zero(1), beta),
                    DegenerateDesignError);
  }
  SECTION("anti-aligned coefficients carry negative aligned energy") {
    CHECK_THROWS_AS(
        solve_eta(cfg, chan, CVector::Constant(1, cdouble{-1.0, 0.0}), beta),
        DegenerateDesignError);
  }
  SECTION("silent relays carry no signal at all") {
    CHECK_THROWS_AS(solve_eta(cfg, chan, CVector::Constant(1, cdouble{1.0, 0.0}),
                              CVector::Zero(1)),
                    DegenerateDesignError);
  }
}

TEST_CASE("order robustness: unaligned phases still yield the scalar optimum") {
  // With phases not yet aligned the cross term has an imaginary part; the
  // update must still minimize over positive factors, which the grid search
  // confirms.
  const auto inst = testsupport::battery_instance(11);
  TransmitDesign skewed = inst.design;
  skewed.wd_coeffs[0] *= std::polar(1.0, 0.4);
  double eta = 0.0;
  try {
    eta = solve_eta(inst.cfg, inst.chan, skewed);
  } catch (const DegenerateDesignError&) {
    SUCCEED("design became degenerate; nothing to bracket");
    return;
  }
  const auto grid =
      grid_search_scalar_eta(inst.cfg, inst.chan, skewed.wd_coeffs,
                             skewed.relay_coeffs, eta / 4.0, eta * 4.0, 20001);
  const double step = std::log(16.0) / 20000.0;
  CHECK(std::abs(std::log(grid.best_eta / eta)) <= step * (1.0 + 1e-9));
}
