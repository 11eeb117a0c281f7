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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aircomp/denoise.hpp"
#include "aircomp/relay_update.hpp"
#include "aircomp/wd_update.hpp"

namespace aircomp {

//! Transmission scheme: the full alternating optimization, or one of the
//! benchmark schemes that pin WD and/or relay magnitudes to full power and
//! optimize only what remains (phases and the de-noising factor).
enum class Scheme {
  Proposed,
  FullPowerWdsAndRelays,
  FullPowerWdsOnly,
  FullPowerRelaysOnly,
};

inline const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Proposed: return "proposed";
    case Scheme::FullPowerWdsAndRelays: return "full-both";
    case Scheme::FullPowerWdsOnly: return "full-wd";
    case Scheme::FullPowerRelaysOnly: return "full-relay";
  }
  return "unknown";
}

inline std::optional<Scheme> scheme_from_name(std::string_view name) {
  if (name == "proposed") return Scheme::Proposed;
  if (name == "full-both") return Scheme::FullPowerWdsAndRelays;
  if (name == "full-wd") return Scheme::FullPowerWdsOnly;
  if (name == "full-relay") return Scheme::FullPowerRelaysOnly;
  return std::nullopt;
}

struct SolverOptions {
  double epsilon = 1e-4;    // relative-improvement stopping threshold
  int max_outer_iters = 200;
  Scheme scheme = Scheme::Proposed;
  double wd_tol = 1e-10;    // optimality residual target of the WD block
  double relay_tol = 1e-8;  // projected-gradient residual target
};

//! Record of one alternating-optimization run. The error trace includes the
//! initial point, so its length is iterations + 1.
struct SolveTrace {
  std::vector<MseBreakdown> mse;
  bool converged = false;
  int iterations = 0;
  TransmitDesign final_design;
  DualState final_dual;
};

//! Feasible full-power starting point shared by all schemes: every WD at its
//! budget cap with zero phase, every relay at its implied magnitude cap with
//! phase opposite its FC channel (relays with a zero FC channel stay silent),
//! and the matching optimal de-noising factor. With zero-phase WD
//! coefficients the aligned signal amplitude can come out nonpositive on
//! adverse channel draws; the de-noising factor then falls back to one and
//! the first WD update restores alignment.
inline TransmitDesign initialize(const SystemConfig& cfg,
                                 const ChannelRealization& chan,
                                 Scheme /*scheme*/) {
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  TransmitDesign design;
  design.wd_coeffs.resize(K);
  for (int k = 0; k < K; ++k) {
    design.wd_coeffs[k] = std::sqrt(cfg.wd_power_budget[k]) /
                          std::sqrt(cfg.message_variance[k]);
  }
  const RVector caps = relay_budget_caps(cfg, chan, design.wd_coeffs);
  design.relay_coeffs.resize(M);
  for (int m = 0; m < M; ++m) {
    const cdouble g = chan.relay_fc_gains[m];
    design.relay_coeffs[m] =
        g == cdouble{0.0, 0.0}
            ? cdouble{0.0, 0.0}
            : std::polar(std::sqrt(caps[m]), -std::arg(g));
  }
  try {
    design.denoise = solve_eta(cfg, chan, design);
  } catch (const DegenerateDesignError&) {
    design.denoise = 1.0;
  }
  return design;
}

//! Runs the alternating optimization (or a benchmark restriction of it) from
//! the shared full-power initialization.
//!
//! One iteration updates the WD coefficients, then the relay coefficients,
//! then the de-noising factor; the loop continues while the relative error
//! improvement exceeds epsilon. For the Proposed scheme every update is an
//! exact or certified-descent block minimization, so the recorded error
//! sequence is non-increasing. The benchmark schemes re-pin magnitudes to
//! full power after each WD update, which is not a descent step; if an
//! iteration worsens the error, the previous design is kept and the run
//! stops, so recorded traces stay non-increasing for every scheme.
inline SolveTrace solve(const SystemConfig& cfg, const ChannelRealization& chan,
                        const SolverOptions& opts) {
  if (!(opts.epsilon > 0.0))
    throw std::invalid_argument("solve: epsilon must be > 0");
  if (opts.max_outer_iters < 1)
    throw std::invalid_argument("solve: max_outer_iters must be >= 1");

  SolveTrace trace;
  TransmitDesign design = initialize(cfg, chan, opts.scheme);
  trace.final_dual.mu = RVector::Zero(cfg.num_relays);
  trace.mse.push_back(evaluate_mse(cfg, chan, design));

  const auto full_power_magnitudes = [&]() {
    RVector box(cfg.num_wds);
    for (int k = 0; k < cfg.num_wds; ++k)
      box[k] = std::sqrt(cfg.wd_power_budget[k]) /
               std::sqrt(cfg.message_variance[k]);
    return box;
  }();

  bool converged = false;
  bool degenerate = false;
  for (int n = 1; n <= opts.max_outer_iters; ++n) {
    const double previous = trace.mse.back().total;
    if (previous <= 0.0) {
      converged = true;
      break;
    }
    TransmitDesign next = design;

    // WD update.
    switch (opts.scheme) {
      case Scheme::Proposed:
      case Scheme::FullPowerRelaysOnly: {
        WdBlockResult wd = solve_wd_block(cfg, chan, next.relay_coeffs,
                                          next.denoise, opts.wd_tol);
        next.wd_coeffs = std::move(wd.alpha);
        trace.final_dual = std::move(wd.dual);
        break;
      }
      case Scheme::FullPowerWdsAndRelays:
      case Scheme::FullPowerWdsOnly: {
        const CVector c = composite_channels(chan, next.relay_coeffs);
        const RVector theta = align_phases(c);
        for (int k = 0; k < cfg.num_wds; ++k)
          next.wd_coeffs[k] = std::polar(full_power_magnitudes[k], theta[k]);
        break;
      }
    }

    // Relay update.
    switch (opts.scheme) {
      case Scheme::Proposed:
      case Scheme::FullPowerWdsOnly: {
        RelayBlockResult rb =
            solve_relay_block(cfg, chan, next.wd_coeffs, next.denoise,
                              next.relay_coeffs, opts.relay_tol);
        next.relay_coeffs = std::move(rb.beta);
        break;
      }
      case Scheme::FullPowerWdsAndRelays:
      case Scheme::FullPowerRelaysOnly: {
        const RVector caps = relay_budget_caps(cfg, chan, next.wd_coeffs);
        const CVector candidate =
            mmse_candidate(cfg, chan, next.wd_coeffs, next.denoise);
        for (int m = 0; m < cfg.num_relays; ++m) {
          const cdouble reference = candidate[m] == cdouble{0.0, 0.0}
                                        ? chan.relay_fc_gains[m] == cdouble{0.0, 0.0}
                                              ? cdouble{1.0, 0.0}
                                              : std::conj(chan.relay_fc_gains[m])
                                        : candidate[m];
          next.relay_coeffs[m] =
              std::polar(std::sqrt(caps[m]), std::arg(reference));
        }
        break;
      }
    }

    // De-noising update; a degenerate design keeps the previous factor and
    // ends the run as non-converged.
    try {
      next.denoise = solve_eta(cfg, chan, next);
    } catch (const DegenerateDesignError&) {
      degenerate = true;
    }

    const MseBreakdown current = evaluate_mse(cfg, chan, next);
    if (opts.scheme != Scheme::Proposed && current.total > previous) {
      // Full-power re-pinning worsened the error; keep the previous design.
      converged = true;
      break;
    }
    design = std::move(next);
    trace.mse.push_back(current);
    trace.iterations = n;
    if (degenerate) break;
    const double improvement = (previous - current.total) / previous;
    if (!(improvement > opts.epsilon)) {
      converged = true;
      break;
    }
  }

  trace.converged = converged && !degenerate;
  trace.final_design = std::move(design);
  return trace;
}

//! JSON form of a trace: iteration-indexed error components plus the final
//! design and multipliers.
inline nlohmann::json trace_to_json(const SolveTrace& trace) {
  nlohmann::json mse = nlohmann::json::array();
  for (const MseBreakdown& b : trace.mse) {
    mse.push_back({{"misalignment", b.misalignment},
                   {"noise_induced", b.noise_induced},
                   {"total", b.total}});
  }
  nlohmann::json design;
  const TransmitDesign& d = trace.final_design;
  auto complex_parts = [](const CVector& z) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      re.push_back(z[i].real());
      im.push_back(z[i].imag());
    }
    return std::pair{re, im};
  };
  auto [alpha_re, alpha_im] = complex_parts(d.wd_coeffs);
  auto [beta_re, beta_im] = complex_parts(d.relay_coeffs);
  design["wd_coeffs_re"] = alpha_re;
  design["wd_coeffs_im"] = alpha_im;
  design["relay_coeffs_re"] = beta_re;
  design["relay_coeffs_im"] = beta_im;
  design["denoise"] = d.denoise;
  nlohmann::json mu = nlohmann::json::array();
  for (Eigen::Index m = 0; m < trace.final_dual.mu.size(); ++m)
    mu.push_back(trace.final_dual.mu[m]);
  return {{"iterations", trace.iterations},
          {"converged", trace.converged},
          {"mse", mse},
          {"final_design", design},
          {"dual_mu", mu}};
}

} // namespace aircomp
