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

#include "aircomp/config.hpp"

using namespace aircomp;
using Catch::Approx;

namespace {

const char* kReferenceConfig = R"(
# reference experiment setup
K = 50
M = 10
message_variance = 1.0
wd_power_dbm = 26
relay_power_dbm = 26
relay_noise_watts = 1e-9
fc_noise_watts = 1e-9
wd_relay_distance_m = 350
relay_fc_distance_m = 150
pathloss_ref_db = -37
pathloss_exponent = 3.2
)";

} // namespace

TEST_CASE("reference configuration parses and instantiates") {
  const ConfigTemplate tmpl = parse_config(kReferenceConfig);
  CHECK(tmpl.num_wds == 50);
  CHECK(tmpl.num_relays == 10);
  const auto [cfg, geom] = tmpl.instantiate();
  CHECK(cfg.wd_power_budget[0] == Approx(0.3981071705534972).epsilon(1e-12));
  CHECK(cfg.relay_power_budget[9] == Approx(0.3981071705534972).epsilon(1e-12));
  CHECK(cfg.fc_noise_power == 1e-9);
  CHECK(geom.wd_relay_distance(49, 9) == 350.0);
  CHECK(geom.reference_pathloss == Approx(std::pow(10.0, -3.7)).epsilon(1e-12));
  CHECK(geom.pathloss_exponent == 3.2);
}

TEST_CASE("scalars broadcast to any requested dimensions") {
  const ConfigTemplate tmpl = parse_config(kReferenceConfig);
  const auto [cfg, geom] = tmpl.instantiate(7, 3);
  CHECK(cfg.num_wds == 7);
  CHECK(cfg.message_variance.size() == 7);
  CHECK(geom.wd_relay_distance.rows() == 7);
  CHECK(geom.wd_relay_distance.cols() == 3);
}

TEST_CASE("explicit watts and per-entry arrays are honored") {
  const ConfigTemplate tmpl = parse_config(R"(
K = 2
M = 2
message_variance = 1.0, 4.0
wd_power_watts = 0.5, 0.25
relay_power_watts = 2.0
relay_noise_watts = 1e-3, 2e-3
fc_noise_watts = 1e-4
wd_relay_distance_m = 10, 20; 30, 40
relay_fc_distance_m = 5, 6
pathloss_ref_db = -3
pathloss_exponent = 2.0
)");
  const auto [cfg, geom] = tmpl.instantiate();
  CHECK(cfg.message_variance[1] == 4.0);
  CHECK(cfg.wd_power_budget[0] == 0.5);
  CHECK(cfg.wd_power_budget[1] == 0.25);
  CHECK(cfg.relay_noise_power[1] == 2e-3);
  CHECK(geom.wd_relay_distance(0, 1) == 20.0);
  CHECK(geom.wd_relay_distance(1, 0) == 30.0);
  CHECK(geom.relay_fc_distance[1] == 6.0);
  // An explicit matrix cannot be reshaped to other dimensions.
  CHECK_THROWS_AS(tmpl.instantiate(3, 2), std::invalid_argument);
}

TEST_CASE("malformed configurations are rejected with the offending key") {
  SECTION("unknown key") {
    CHECK_THROWS_WITH(parse_config("K = 1\nbogus_key = 3\n"),
                      Catch::Matchers::ContainsSubstring("bogus_key"));
  }
  SECTION("missing required key") {
    CHECK_THROWS_WITH(parse_config("K = 4\nM = 2\n"),
                      Catch::Matchers::ContainsSubstring("wd_power"));
  }
  SECTION("both unit keys for the same power") {
    const std::string text = std::string(kReferenceConfig) +
                             "wd_power_watts = 0.4\n";
    CHECK_THROWS_AS(parse_config(text), std::invalid_argument);
  }
  SECTION("non-numeric value") {
    CHECK_THROWS_WITH(parse_config("K = five\n"),
                      Catch::Matchers::ContainsSubstring("non-numeric"));
  }
  SECTION("trailing garbage") {
    CHECK_THROWS_AS(parse_config("K = 5x\n"), std::invalid_argument);
  }
  SECTION("not a key-value line") {
    CHECK_THROWS_AS(parse_config("just some words\n"), std::invalid_argument);
  }
  SECTION("array length mismatch at instantiation") {
    const ConfigTemplate tmpl = parse_config(R"(
K = 3
M = 1
message_variance = 1.0, 2.0
wd_power_watts = 1.0
relay_power_watts = 1.0
relay_noise_watts = 1e-3
fc_noise_watts = 1e-3
wd_relay_distance_m = 10
relay_fc_distance_m = 5
pathloss_ref_db = -3
pathloss_exponent = 2.0
)");
    CHECK_THROWS_WITH(tmpl.instantiate(),
                      Catch::Matchers::ContainsSubstring("message_variance"));
  }
}

TEST_CASE("missing files raise an I/O error") {
  CHECK_THROWS_AS(load_config_file("/nonexistent/path/config.txt"),
                  std::runtime_error);
}
