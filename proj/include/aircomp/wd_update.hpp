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

#include <algorithm>
#include <cmath>
#include <vector>

#include "aircomp/mse.hpp"
#include "aircomp/types.hpp"

namespace aircomp {

//! Wraps an angle into the canonical range (-pi, pi].
inline double canonical_phase(double angle) {
  if (angle == -kPi) return kPi;
  return angle;
}

//! Optimal WD transmit phases for given composite channels: theta_k is the
//! opposite of the composite-channel phase so that alpha_k c_k becomes real
//! and nonnegative. A zero composite channel maps to phase 0.
inline RVector align_phases(const CVector& composite) {
  RVector theta(composite.size());
  for (Eigen::Index k = 0; k < composite.size(); ++k) {
    theta[k] = composite[k] == cdouble{0.0, 0.0}
                   ? 0.0
                   : canonical_phase(-std::arg(composite[k]));
  }
  return theta;
}

//! Multipliers of the per-relay power constraints in the WD subproblem. The
//! per-WD budget multipliers are represented implicitly by the magnitude clip
//! and never stored.
struct DualState {
  RVector mu; // length M, nonnegative
};

//! Regularized channel-inversion magnitudes for given relay coefficients,
//! de-noising factor and relay-constraint multipliers:
//!
//!   abar_k = min{ (|c_k|/eta) / (|c_k|^2/eta^2 + sum_m mu_m |h_mk|^2),
//!                 sqrt(P_k)/delta_k }.
//!
//! When the denominator vanishes (zero composite channel and zero
//! multipliers) the objective is constant in abar_k and the budget cap is
//! returned by convention; the block solver overrides that case with zero.
inline RVector wd_magnitudes(const SystemConfig& cfg,
                             const ChannelRealization& chan,
                             const CVector& relay_coeffs, double eta,
                             const RVector& mu) {
  if (!(eta > 0.0))
    throw std::invalid_argument("wd_magnitudes: eta must be > 0");
  if (mu.size() != cfg.num_relays || (mu.size() > 0 && mu.minCoeff() < 0.0))
    throw std::invalid_argument(
        "wd_magnitudes: mu must be nonnegative with length M");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  const CVector c = composite_channels(chan, relay_coeffs);
  RVector abar(K);
  for (int k = 0; k < K; ++k) {
    const double a = std::abs(c[k]) / eta;
    double regularizer = 0.0;
    for (int m = 0; m < M; ++m)
      regularizer += mu[m] * std::norm(chan.wd_relay_gains(m, k));
    const double cap =
        std::sqrt(cfg.wd_power_budget[k]) / std::sqrt(cfg.message_variance[k]);
    const double denominator = a * a + regularizer;
    abar[k] = denominator == 0.0 ? cap : std::min(a / denominator, cap);
  }
  return abar;
}

//! Scaled optimality residuals of a (magnitudes, multipliers) pair for the
//! WD subproblem. All entries are dimensionless; a certified solution drives
//! max_residual() to solver tolerance.
struct WdKktReport {
  double box_violation = 0.0;   // primal: budget caps
  double relay_violation = 0.0; // primal: relay power coupling
  double comp_slackness = 0.0;  // multiplier * slack, in objective units
  double stationarity = 0.0;    // gradient of the Lagrangian
  double max_residual() const {
    return std::max(std::max(box_violation, relay_violation),
                    std::max(comp_slackness, stationarity));
  }
};

namespace detail {

//! Precomputed data for the WD-magnitude subproblem with fixed relay
//! coefficients and de-noising factor.
struct WdProblem {
  int K = 0;
  int M = 0;
  RVector a;      // |c_k| / eta
  RVector box;    // sqrt(P_k)/delta_k, possibly forced to 0 (see build)
  RVector delta2; // message variances
  RMatrix h2;     // |h_mk|^2, M x K
  RMatrix w;      // |h_mk|^2 delta_k^2, M x K
  std::vector<int> constrained; // relays whose power cap can bind
  RVector rhs;                  // P_Rm / |beta_m|^2, indexed by m
  RVector sigma2;               // relay noise powers
  std::vector<bool> degenerate; // zero composite channel -> alpha forced to 0
  double obj_scale = 0.0;       // sum of message variances

  static WdProblem build(const SystemConfig& cfg,
                         const ChannelRealization& chan,
                         const CVector& relay_coeffs, double eta) {
    WdProblem p;
    p.K = cfg.num_wds;
    p.M = cfg.num_relays;
    const CVector c = composite_channels(chan, relay_coeffs);
    p.a.resize(p.K);
    p.box.resize(p.K);
    p.delta2 = cfg.message_variance;
    p.h2.resize(p.M, p.K);
    p.w.resize(p.M, p.K);
    p.rhs = RVector::Zero(p.M);
    p.sigma2 = cfg.relay_noise_power;
    p.degenerate.assign(p.K, false);
    p.obj_scale = cfg.message_variance.sum();
    for (int k = 0; k < p.K; ++k) {
      p.a[k] = std::abs(c[k]) / eta;
      p.degenerate[k] = (std::abs(c[k]) == 0.0);
      p.box[k] = std::sqrt(cfg.wd_power_budget[k]) /
                 std::sqrt(cfg.message_variance[k]);
      for (int m = 0; m < p.M; ++m) {
        p.h2(m, k) = std::norm(chan.wd_relay_gains(m, k));
        p.w(m, k) = p.h2(m, k) * cfg.message_variance[k];
      }
    }
    for (int m = 0; m < p.M; ++m) {
      const double beta2 = std::norm(relay_coeffs[m]);
      if (beta2 == 0.0) continue; // constraint reads sigma^2 <= infinity
      const double cap = cfg.relay_power_budget[m] / beta2;
      p.rhs[m] = cap;
      if (cap < p.sigma2[m] * (1.0 - 1e-12))
        throw std::invalid_argument(
            "solve_wd_block: relay power cap below its own forwarded noise; "
            "the subproblem is infeasible for any WD coefficients");
      if (cap <= p.sigma2[m] * (1.0 + 1e-12)) {
        // No room for any signal through this relay: pin contributors to 0.
        for (int k = 0; k < p.K; ++k)
          if (p.h2(m, k) > 0.0) p.box[k] = 0.0;
        continue;
      }
      p.constrained.push_back(m);
    }
    return p;
  }

  //! Inner minimizer of the Lagrangian for fixed multipliers.
  RVector alpha_of_mu(const RVector& mu) const {
    RVector abar(K);
    for (int k = 0; k < K; ++k) {
      if (degenerate[k] || box[k] == 0.0) {
        abar[k] = 0.0;
        continue;
      }
      double q = 0.0;
      for (int m : constrained) q += mu[m] * h2(m, k);
      abar[k] = std::min(a[k] / (a[k] * a[k] + q), box[k]);
    }
    return abar;
  }

  //! Constraint value minus cap for one relay.
  double slack(int m, const RVector& abar) const {
    double lhs = sigma2[m];
    for (int k = 0; k < K; ++k) lhs += abar[k] * abar[k] * w(m, k);
    return lhs - rhs[m];
  }

  double objective(const RVector& abar) const {
    double f = 0.0;
    for (int k = 0; k < K; ++k) {
      const double miss = abar[k] * a[k] - 1.0;
      f += miss * miss * delta2[k];
    }
    return f;
  }

  double dual_value(const RVector& mu, const RVector& abar) const {
    double value = objective(abar);
    for (int k = 0; k < K; ++k) {
      double q = 0.0;
      for (int m : constrained) q += mu[m] * h2(m, k);
      value += abar[k] * abar[k] * q * delta2[k];
    }
    for (int m : constrained) value += mu[m] * (sigma2[m] - rhs[m]);
    return value;
  }

  double constraint_scale(int m, const RVector& abar) const {
    return std::max({rhs[m], sigma2[m], slack(m, abar) + rhs[m]});
  }

  WdKktReport kkt(const RVector& abar, const RVector& mu) const {
    WdKktReport rep;
    for (int m : constrained) {
      const double s = slack(m, abar);
      const double scale = constraint_scale(m, abar);
      rep.relay_violation =
          std::max(rep.relay_violation, std::max(0.0, s) / scale);
      rep.comp_slackness =
          std::max(rep.comp_slackness, mu[m] * std::abs(s) / obj_scale);
    }
    for (int k = 0; k < K; ++k) {
      if (degenerate[k] || box[k] == 0.0) continue;
      rep.box_violation =
          std::max(rep.box_violation, (abar[k] - box[k]) / box[k]);
      double q = 0.0;
      for (int m : constrained) q += mu[m] * h2(m, k);
      const double lhs = abar[k] * (a[k] * a[k] + q);
      const double scale = std::max(lhs, a[k]);
      if (abar[k] < box[k] * (1.0 - 1e-12)) {
        // Interior: the implicit budget multiplier must vanish.
        rep.stationarity =
            std::max(rep.stationarity, std::abs(lhs - a[k]) / scale);
      } else {
        // Clipped: the implicit budget multiplier must be nonnegative.
        rep.stationarity =
            std::max(rep.stationarity, std::max(0.0, lhs - a[k]) / scale);
      }
    }
    return rep;
  }

  //! Exact 1-D complementarity root for one relay holding the other
  //! multipliers fixed: the slack is decreasing in mu_m, so either the
  //! constraint is inactive at mu_m = 0 or bisection brackets the root.
  double coordinate_root(int m, const RVector& mu) const {
    RVector q_base = RVector::Zero(K); // regularizer without constraint m
    for (int k = 0; k < K; ++k) {
      double q = 0.0;
      for (int j : constrained)
        if (j != m) q += mu[j] * h2(j, k);
      q_base[k] = q;
    }
    auto slack_at = [&](double mu_m) {
      double lhs = sigma2[m];
      for (int k = 0; k < K; ++k) {
        if (degenerate[k] || box[k] == 0.0) continue;
        const double q = q_base[k] + mu_m * h2(m, k);
        const double ab = std::min(a[k] / (a[k] * a[k] + q), box[k]);
        lhs += ab * ab * w(m, k);
      }
      return lhs - rhs[m];
    };
    if (slack_at(0.0) <= 0.0) return 0.0;
    double hi = std::max(1.0, mu.lpNorm<Eigen::Infinity>());
    for (int grow = 0; grow < 400; ++grow) {
      if (slack_at(hi) < 0.0) break;
      hi *= 4.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (slack_at(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return hi; // feasible side of the bracket
  }
};

} // namespace detail

//! Residuals of a candidate (magnitudes, multipliers) pair against the WD
//! subproblem optimality system; used by tests and the acceptance suite.
inline WdKktReport wd_kkt_report(const SystemConfig& cfg,
                                 const ChannelRealization& chan,
                                 const CVector& relay_coeffs, double eta,
                                 const RVector& alpha_bar, const RVector& mu) {
  const auto p = detail::WdProblem::build(cfg, chan, relay_coeffs, eta);
  return p.kkt(alpha_bar, mu);
}

struct WdBlockResult {
  CVector alpha;     // optimal WD coefficients, phases aligned
  RVector alpha_bar; // optimal magnitudes
  DualState dual;    // relay-constraint multipliers
  WdKktReport kkt;   // residuals at the returned pair
  bool converged = false;
  int iterations = 0;
};

//! Exact solver for the WD-coefficient block with fixed relay coefficients
//! and de-noising factor.
//!
//! Phases are aligned opposite the composite channels. Magnitudes follow the
//! regularized channel inversion whose multipliers are found in two stages:
//! projected gradient ascent on the concave dual (the inner minimizer is
//! closed-form, so dual steps are cheap) and a cyclic per-constraint
//! bisection polish that drives each multiplier to its exact complementarity
//! root. WDs with a zero composite channel contribute a constant error term
//! but still consume relay budget; their coefficient is set to zero.
inline WdBlockResult solve_wd_block(const SystemConfig& cfg,
                                    const ChannelRealization& chan,
                                    const CVector& relay_coeffs, double eta,
                                    double tol = 1e-10,
                                    int max_iters = 10000) {
  if (!(eta > 0.0))
    throw std::invalid_argument("solve_wd_block: eta must be > 0");
  const auto p = detail::WdProblem::build(cfg, chan, relay_coeffs, eta);

  RVector mu = RVector::Zero(p.M);
  RVector abar = p.alpha_of_mu(mu);
  int iterations = 0;

  auto residual = [&](const RVector& mu_now, const RVector& abar_now) {
    return p.kkt(abar_now, mu_now).max_residual();
  };

  if (!p.constrained.empty() && residual(mu, abar) > tol) {
    // Stage 1: dual projected gradient ascent with backtracking, down to a
    // coarse tolerance that puts the active set within reach of the polish.
    double step = 1.0;
    double dual_now = p.dual_value(mu, abar);
    const int gradient_budget = max_iters / 2;
    for (; iterations < gradient_budget; ++iterations) {
      RVector grad = RVector::Zero(p.M);
      for (int m : p.constrained) grad[m] = p.slack(m, abar);
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        RVector mu_try = (mu + step * grad).cwiseMax(0.0);
        const RVector abar_try = p.alpha_of_mu(mu_try);
        const double dual_try = p.dual_value(mu_try, abar_try);
        const double predicted = grad.dot(mu_try - mu);
        if (dual_try >= dual_now + 1e-4 * predicted && predicted > 0.0) {
          mu = std::move(mu_try);
          abar = abar_try;
          dual_now = dual_try;
          accepted = true;
          if (bt == 0) step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || residual(mu, abar) <= std::max(tol, 1e-6)) break;
    }

    // Stage 2: cyclic exact complementarity polish. Each pass re-solves every
    // multiplier's monotone 1-D condition given the others.
    for (int cycle = 0; cycle < 600 && iterations < max_iters; ++cycle) {
      for (int m : p.constrained) mu[m] = p.coordinate_root(m, mu);
      abar = p.alpha_of_mu(mu);
      ++iterations;
      if (residual(mu, abar) <= tol) break;
    }
  }

  WdBlockResult result;
  result.alpha_bar = abar;
  result.dual.mu = mu;
  result.kkt = p.kkt(abar, mu);
  result.converged = result.kkt.max_residual() <= tol;
  result.iterations = iterations;

  const CVector c = composite_channels(chan, relay_coeffs);
  const RVector theta = align_phases(c);
  result.alpha.resize(p.K);
  for (int k = 0; k < p.K; ++k)
    result.alpha[k] = std::polar(abar[k], theta[k]);
  return result;
}

} // namespace aircomp
