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
// Independent verification machinery for the closed-form block updates:
// projected-gradient solvers for the WD and relay subproblems, a central
// finite-difference gradient, and scalar grid search for the de-noising
// factor. Everything here evaluates objectives through the analytic error
// expression only and never calls the closed forms it is used to verify.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "aircomp/mse.hpp"
#include "aircomp/types.hpp"

namespace aircomp {

//! Central-difference gradient of a scalar objective over a real vector.
//! Absolute step per coordinate; error is O(step^2 * |f'''|).
inline RVector fd_gradient(const std::function<double(const RVector&)>& f,
                           const RVector& point, double step) {
  if (!(step > 0.0))
    throw std::invalid_argument("fd_gradient: step must be > 0");
  RVector grad(point.size());
  RVector x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

//! Packs a complex vector as [real parts; imaginary parts] for use with
//! fd_gradient.
inline RVector complex_to_real(const CVector& z) {
  RVector x(2 * z.size());
  x.head(z.size()) = z.real();
  x.tail(z.size()) = z.imag();
  return x;
}

inline CVector real_to_complex(const RVector& x) {
  const Eigen::Index n = x.size() / 2;
  CVector z(n);
  z.real() = x.head(n);
  z.imag() = x.tail(n);
  return z;
}

namespace detail {

//! Euclidean projection onto the axis-aligned ellipsoid
//! sum_k weight_k x_k^2 <= cap (cap > 0). Solves the secular equation for the
//! multiplier by Newton with a bisection safeguard.
inline RVector project_ellipsoid(const RVector& point, const RVector& weight,
                                 double cap) {
  double value = 0.0;
  for (Eigen::Index k = 0; k < point.size(); ++k)
    value += weight[k] * point[k] * point[k];
  if (value <= cap) return point;

  auto phi = [&](double nu) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < point.size(); ++k) {
      const double denom = 1.0 + nu * weight[k];
      s += weight[k] * point[k] * point[k] / (denom * denom);
    }
    return s;
  };
  // phi is convex and decreasing, hence Newton from 0 increases monotonically
  // toward the root; a growing upper bracket guards against overshoot.
  double nu = 0.0;
  double hi = 1.0 / weight.maxCoeff();
  while (phi(hi) > cap) hi *= 4.0;
  for (int it = 0; it < 200; ++it) {
    const double val = phi(nu);
    if (std::abs(val - cap) <= 1e-15 * cap) break;
    double slope = 0.0;
    for (Eigen::Index k = 0; k < point.size(); ++k) {
      const double denom = 1.0 + nu * weight[k];
      slope += -2.0 * weight[k] * weight[k] * point[k] * point[k] /
               (denom * denom * denom);
    }
    double next = slope < 0.0 ? nu - (val - cap) / slope : hi;
    if (!(next > nu) || next > hi) next = 0.5 * (nu + hi);
    if (phi(next) < cap)
      hi = next;
    else
      nu = next;
    if (hi - nu <= 1e-16 * std::max(1.0, nu)) break;
  }
  RVector out(point.size());
  for (Eigen::Index k = 0; k < point.size(); ++k)
    out[k] = point[k] / (1.0 + nu * weight[k]);
  return out;
}

//! Dykstra cyclic projection onto the intersection of the box
//! [lower, upper] and a family of axis-aligned ellipsoids. Plain alternating
//! projection only reaches some point of the intersection; the Dykstra
//! increments make the limit the orthogonal projection itself.
struct DykstraProjector {
  RVector lower, upper;
  std::vector<RVector> weights;
  std::vector<double> caps;

  RVector project(const RVector& point, int max_cycles = 600) const {
    const Eigen::Index n = point.size();
    const size_t num_sets = 1 + weights.size();
    std::vector<RVector> increment(num_sets, RVector::Zero(n));
    RVector x = point;
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
      double change = 0.0;
      for (size_t s = 0; s < num_sets; ++s) {
        const RVector target = x + increment[s];
        RVector projected;
        if (s == 0)
          projected = target.cwiseMax(lower).cwiseMin(upper);
        else
          projected = project_ellipsoid(target, weights[s - 1], caps[s - 1]);
        increment[s] = target - projected;
        change = std::max(change, (x - projected).lpNorm<Eigen::Infinity>());
        x = std::move(projected);
      }
      if (change <= 1e-15 * (1.0 + point.lpNorm<Eigen::Infinity>())) break;
    }
    // Dykstra approaches the intersection from outside; a few plain
    // alternating passes pull the iterate inside so weak-duality and
    // feasibility checks hold to roundoff.
    for (int pass = 0; pass < 50; ++pass) {
      x = x.cwiseMax(lower).cwiseMin(upper);
      bool feasible = true;
      for (size_t e = 0; e < weights.size(); ++e) {
        double value = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
          value += weights[e][k] * x[k] * x[k];
        if (value > caps[e]) {
          feasible = false;
          x = project_ellipsoid(x, weights[e], caps[e] * (1.0 - 1e-14));
        }
      }
      if (feasible) break;
    }
    return x;
  }
};

} // namespace detail

struct PgWdResult {
  RVector alpha_bar;
  double objective = 0.0;   // signal-misalignment objective at alpha_bar
  double duality_gap = 0.0; // primal value minus a feasible dual bound
  bool converged = false;
  int iterations = 0;
};

//! Projected-gradient solver for the WD-magnitude subproblem, used as the
//! independent oracle for the closed-form block update.
//!
//! Minimizes the misalignment objective over the box of per-WD budget caps
//! intersected with the per-relay power ellipsoids, projecting via Dykstra
//! cycles. On return the duality gap is estimated from multipliers fitted to
//! the stationarity system on the unclipped coordinates (small-support
//! nonnegative least squares), giving a certificate that the objective is
//! within the gap of the true optimum.
inline PgWdResult pg_solve_wd(const SystemConfig& cfg,
                              const ChannelRealization& chan,
                              const CVector& relay_coeffs, double eta,
                              double tol = 1e-8, int max_iters = 100000) {
  if (!(eta > 0.0))
    throw std::invalid_argument("pg_solve_wd: eta must be > 0");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  const CVector c = composite_channels(chan, relay_coeffs);
  RVector a(K), box(K), delta2 = cfg.message_variance;
  for (int k = 0; k < K; ++k) {
    a[k] = std::abs(c[k]) / eta;
    box[k] = std::sqrt(cfg.wd_power_budget[k]) /
             std::sqrt(cfg.message_variance[k]);
  }

  // Constraint data: ellipsoid per relay whose power cap can bind.
  detail::DykstraProjector projector;
  projector.lower = RVector::Zero(K);
  projector.upper = box;
  std::vector<int> constrained;
  RVector rhs = RVector::Zero(M);
  for (int m = 0; m < M; ++m) {
    const double beta2 = std::norm(relay_coeffs[m]);
    if (beta2 == 0.0) continue;
    rhs[m] = cfg.relay_power_budget[m] / beta2;
    const double room = rhs[m] - cfg.relay_noise_power[m];
    if (room < -1e-12 * rhs[m])
      throw std::invalid_argument(
          "pg_solve_wd: relay power cap below its own forwarded noise");
    RVector weight(K);
    bool any = false;
    for (int k = 0; k < K; ++k) {
      weight[k] = std::norm(chan.wd_relay_gains(m, k)) *
                  cfg.message_variance[k];
      any = any || weight[k] > 0.0;
    }
    if (!any) continue;
    if (room <= 0.0) {
      for (int k = 0; k < K; ++k)
        if (weight[k] > 0.0) projector.upper[k] = 0.0;
      continue;
    }
    projector.weights.push_back(std::move(weight));
    projector.caps.push_back(room);
    constrained.push_back(m);
  }

  // Objective through the analytic error expression: the misalignment term
  // with phases chosen opposite the composite channels.
  auto misalignment = [&](const RVector& abar) {
    TransmitDesign design;
    design.wd_coeffs.resize(K);
    for (int k = 0; k < K; ++k)
      design.wd_coeffs[k] =
          c[k] == cdouble{0.0, 0.0}
              ? cdouble{abar[k], 0.0}
              : std::polar(abar[k], -std::arg(c[k]));
    design.relay_coeffs = relay_coeffs;
    design.denoise = eta;
    return evaluate_mse(cfg, chan, design).misalignment;
  };
  auto gradient = [&](const RVector& abar) {
    RVector g(K);
    for (int k = 0; k < K; ++k)
      g[k] = 2.0 * delta2[k] * a[k] * (abar[k] * a[k] - 1.0);
    return g;
  };

  PgWdResult result;
  double lipschitz = 0.0;
  for (int k = 0; k < K; ++k)
    lipschitz = std::max(lipschitz, 2.0 * delta2[k] * a[k] * a[k]);
  if (lipschitz == 0.0) {
    // All composite channels vanish: the objective is constant.
    result.alpha_bar = RVector::Zero(K);
    result.objective = misalignment(result.alpha_bar);
    result.converged = true;
    return result;
  }

  const double probe = 1.0 / lipschitz;
  double grad_scale = 0.0;
  for (int k = 0; k < K; ++k)
    grad_scale = std::max(grad_scale, 2.0 * delta2[k] * a[k]);

  RVector x = projector.project(RVector::Zero(K));
  double value = misalignment(x);
  double step = probe;
  bool converged = false;
  int iterations = 0;
  for (; iterations < max_iters; ++iterations) {
    const RVector grad = gradient(x);
    const RVector probe_point = projector.project(x - probe * grad);
    const double pg_norm = (x - probe_point).norm() / probe;
    if (pg_norm <= tol * grad_scale) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      const RVector x_try = projector.project(x - step * grad);
      const double value_try = misalignment(x_try);
      const double directional = grad.dot(x_try - x);
      if (value_try <= value + 1e-4 * directional && directional < 0.0) {
        x = x_try;
        value = value_try;
        accepted = true;
        if (bt == 0) step = std::min(step * 1.5, 1e6 * probe);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = pg_norm <= 1e3 * tol * grad_scale;
      break;
    }
  }

  // Duality-gap certificate. Complementarity pins the multipliers of
  // inactive constraints to zero; the rest are fitted to the stationarity
  // equations of the unclipped coordinates (small-support nonnegative least
  // squares by enumeration), then the dual function is evaluated.
  const int n = static_cast<int>(constrained.size());
  RVector mu = RVector::Zero(n);
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    double used = 0.0;
    for (int k = 0; k < K; ++k)
      used += projector.weights[i][k] * x[k] * x[k];
    if (used >= projector.caps[i] * (1.0 - 1e-6)) candidates.push_back(i);
  }
  if (!candidates.empty() && candidates.size() <= 12) {
    std::vector<int> unclipped;
    for (int k = 0; k < K; ++k) {
      if (a[k] > 0.0 && x[k] > 1e-12 * box[k] &&
          x[k] < projector.upper[k] * (1.0 - 1e-9))
        unclipped.push_back(k);
    }
    if (!unclipped.empty()) {
      RMatrix B(unclipped.size(), candidates.size());
      RVector d(unclipped.size());
      for (size_t r = 0; r < unclipped.size(); ++r) {
        const int k = unclipped[r];
        for (size_t i = 0; i < candidates.size(); ++i)
          B(r, i) = std::norm(chan.wd_relay_gains(constrained[candidates[i]], k));
        d[r] = a[k] / x[k] - a[k] * a[k];
      }
      double best = d.squaredNorm(); // support-free fit
      for (int mask = 1; mask < (1 << candidates.size()); ++mask) {
        std::vector<int> support;
        for (size_t i = 0; i < candidates.size(); ++i)
          if (mask & (1 << i)) support.push_back(static_cast<int>(i));
        RMatrix Bs(B.rows(), support.size());
        for (size_t j = 0; j < support.size(); ++j)
          Bs.col(j) = B.col(support[j]);
        const RVector sol = Bs.colPivHouseholderQr().solve(d);
        if (sol.size() > 0 && sol.minCoeff() < 0.0) continue;
        const double fit = (Bs * sol - d).squaredNorm();
        if (fit < best) {
          best = fit;
          mu.setZero();
          for (size_t j = 0; j < support.size(); ++j)
            mu[candidates[support[j]]] = sol[j];
        }
      }
    }
  }
  double dual_value = 0.0;
  for (int k = 0; k < K; ++k) {
    double q = 0.0;
    for (int i = 0; i < n; ++i)
      q += mu[i] * std::norm(chan.wd_relay_gains(constrained[i], k));
    double t = a[k] == 0.0 ? 0.0 : a[k] / (a[k] * a[k] + q);
    t = std::min(t, projector.upper[k]);
    const double miss = t * a[k] - 1.0;
    dual_value += delta2[k] * (miss * miss + t * t * q);
  }
  for (int i = 0; i < n; ++i) {
    const int m = constrained[i];
    dual_value += mu[i] * (cfg.relay_noise_power[m] - rhs[m]);
  }

  result.alpha_bar = x;
  result.objective = value;
  result.duality_gap = value - dual_value;
  result.converged = converged;
  result.iterations = iterations;
  return result;
}

struct PgRelayResult {
  CVector beta;
  double objective = 0.0; // K^2-scaled MSE at the returned coefficients
  bool converged = false;
  int iterations = 0;
};

//! Projected-gradient solver for the relay subproblem over the
//! per-coordinate magnitude caps (projection is the magnitude clip), used as
//! the independent oracle for the closed-form block update. Objective values
//! come from the analytic error expression; always returns a feasible point.
inline PgRelayResult pg_solve_relay(const SystemConfig& cfg,
                                    const ChannelRealization& chan,
                                    const CVector& wd_coeffs, double eta,
                                    double tol = 1e-8,
                                    int max_iters = 100000) {
  if (!(eta > 0.0))
    throw std::invalid_argument("pg_solve_relay: eta must be > 0");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;

  RVector radius(M);
  for (int m = 0; m < M; ++m) {
    double received = cfg.relay_noise_power[m];
    for (int k = 0; k < K; ++k)
      received += std::norm(wd_coeffs[k]) *
                  std::norm(chan.wd_relay_gains(m, k)) *
                  cfg.message_variance[k];
    radius[m] = std::sqrt(cfg.relay_power_budget[m] / received);
  }

  auto objective = [&](const CVector& beta) {
    TransmitDesign design{wd_coeffs, beta, eta};
    const MseBreakdown b = evaluate_mse(cfg, chan, design);
    return b.misalignment + b.noise_induced;
  };
  // Real-equivalent gradient assembled from the same error expression:
  // d/dbeta_m* of the quadratic-in-beta objective.
  auto gradient = [&](const CVector& beta) {
    const CVector c = composite_channels(chan, beta);
    CVector g = CVector::Zero(M);
    for (int m = 0; m < M; ++m) {
      g[m] = 2.0 * std::norm(chan.relay_fc_gains[m]) *
             cfg.relay_noise_power[m] * beta[m] / (eta * eta);
    }
    for (int k = 0; k < K; ++k) {
      const cdouble mismatch = wd_coeffs[k] * c[k] / eta - 1.0;
      for (int m = 0; m < M; ++m) {
        const cdouble coupling = wd_coeffs[k] * chan.relay_fc_gains[m] *
                                 chan.wd_relay_gains(m, k) / eta;
        g[m] += 2.0 * cfg.message_variance[k] * mismatch * std::conj(coupling);
      }
    }
    return g;
  };
  auto clip = [&](const CVector& beta) {
    CVector out = beta;
    for (int m = 0; m < M; ++m) {
      const double magnitude = std::abs(out[m]);
      if (magnitude > radius[m]) out[m] *= radius[m] / magnitude;
    }
    return out;
  };

  // Gradient Lipschitz bound from the quadratic structure.
  double lipschitz = 0.0;
  {
    double coupling_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      double row = 0.0;
      for (int m = 0; m < M; ++m)
        row += std::abs(wd_coeffs[k] * chan.relay_fc_gains[m] *
                        chan.wd_relay_gains(m, k));
      coupling_sum += cfg.message_variance[k] * row * row;
    }
    double noise_diag = 0.0;
    for (int m = 0; m < M; ++m)
      noise_diag = std::max(noise_diag, std::norm(chan.relay_fc_gains[m]) *
                                            cfg.relay_noise_power[m]);
    lipschitz = 2.0 * (coupling_sum + noise_diag) / (eta * eta);
  }

  PgRelayResult result;
  if (lipschitz == 0.0) {
    result.beta = CVector::Zero(M);
    result.objective = objective(result.beta);
    result.converged = true;
    return result;
  }
  const double probe = 1.0 / lipschitz;
  const double grad_scale =
      std::max(gradient(CVector::Zero(M)).norm(), lipschitz * radius.norm());

  CVector x = CVector::Zero(M);
  double value = objective(x);
  double step = probe;
  bool converged = false;
  int iterations = 0;
  for (; iterations < max_iters; ++iterations) {
    const CVector grad = gradient(x);
    const CVector probe_point = clip(x - probe * grad);
    const double pg_norm = (x - probe_point).norm() / probe;
    if (pg_norm <= tol * std::max(grad_scale, 1e-300)) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      const CVector x_try = clip(x - step * grad);
      const double value_try = objective(x_try);
      const double directional = (grad.dot(x_try - x)).real();
      if (value_try <= value + 1e-4 * directional && directional < 0.0) {
        x = x_try;
        value = value_try;
        accepted = true;
        if (bt == 0) step = std::min(step * 1.5, 1e6 * probe);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = pg_norm <= 1e3 * tol * std::max(grad_scale, 1e-300);
      break;
    }
  }
  result.beta = x;
  result.objective = value;
  result.converged = converged;
  result.iterations = iterations;
  return result;
}

struct EtaGridResult {
  double best_eta = 0.0;
  double best_objective = 0.0;
};

//! Exhaustive evaluation of the de-noising objective on a logarithmic grid;
//! used to bracket the closed-form factor.
inline EtaGridResult grid_search_scalar_eta(const SystemConfig& cfg,
                                            const ChannelRealization& chan,
                                            const CVector& wd_coeffs,
                                            const CVector& relay_coeffs,
                                            double eta_lo, double eta_hi,
                                            int points) {
  if (!(eta_lo > 0.0) || !(eta_hi > eta_lo))
    throw std::invalid_argument(
        "grid_search_scalar_eta: need 0 < eta_lo < eta_hi");
  if (points < 3)
    throw std::invalid_argument("grid_search_scalar_eta: points must be >= 3");
  const double ratio = eta_hi / eta_lo;
  EtaGridResult best;
  for (int i = 0; i < points; ++i) {
    TransmitDesign design{wd_coeffs, relay_coeffs,
                          eta_lo * std::pow(ratio, double(i) / (points - 1))};
    const MseBreakdown b = evaluate_mse(cfg, chan, design);
    const double value = b.misalignment + b.noise_induced;
    if (i == 0 || value < best.best_objective) {
      best.best_eta = design.denoise;
      best.best_objective = value;
    }
  }
  return best;
}

} // namespace aircomp
