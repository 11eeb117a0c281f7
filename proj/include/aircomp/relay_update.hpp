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
#include <optional>
#include <vector>

#include "aircomp/mse.hpp"
#include "aircomp/types.hpp"

namespace aircomp {

//! Per-relay squared-magnitude caps on the forwarding coefficients implied by
//! the relay power budgets for fixed WD coefficients:
//!
//!   cap_m = P_Rm / (sum_k |alpha_k|^2 |h_mk|^2 delta_k^2 + sigma_m^2).
//!
//! Strictly positive since the relay noise power is.
inline RVector relay_budget_caps(const SystemConfig& cfg,
                                 const ChannelRealization& chan,
                                 const CVector& wd_coeffs) {
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  RVector caps(M);
  for (int m = 0; m < M; ++m) {
    double received = cfg.relay_noise_power[m];
    for (int k = 0; k < K; ++k) {
      received += std::norm(wd_coeffs[k]) *
                  std::norm(chan.wd_relay_gains(m, k)) *
                  cfg.message_variance[k];
    }
    caps[m] = cfg.relay_power_budget[m] / received;
  }
  return caps;
}

//! Unconstrained minimizer of the relay-stage objective for fixed WD
//! coefficients and de-noising factor.
//!
//! The channel-Gram-plus-noise system A w = s with
//!   A = sum_k |alpha_k|^2 delta_k^2 h_k h_k^H + diag(sigma_m^2),
//!   s = sum_k alpha_k delta_k^2 h_k,
//! balances received signal power against forwarded relay noise; the
//! candidate is beta_m = eta * conj(w_m) / g_m, where dividing by g_m undoes
//! the relay-to-FC fading and halving eta halves the candidate. Relays with a
//! zero FC channel cannot influence the objective and get beta_m = 0; the
//! system is then solved on the remaining coordinates so the candidate stays
//! the exact stationary point. A is Hermitian positive definite because every
//! relay noise power is positive.
inline CVector mmse_candidate(const SystemConfig& cfg,
                              const ChannelRealization& chan,
                              const CVector& wd_coeffs, double eta) {
  if (!(eta > 0.0))
    throw std::invalid_argument("mmse_candidate: eta must be > 0");
  const int K = cfg.num_wds;
  const int M = cfg.num_relays;
  std::vector<int> active;
  for (int m = 0; m < M; ++m)
    if (chan.relay_fc_gains[m] != cdouble{0.0, 0.0}) active.push_back(m);
  CVector beta_hat = CVector::Zero(M);
  const int n = static_cast<int>(active.size());
  if (n == 0) return beta_hat;

  CMatrix gram = CMatrix::Zero(n, n);
  CVector rhs = CVector::Zero(n);
  for (int i = 0; i < n; ++i) gram(i, i) = cfg.relay_noise_power[active[i]];
  CVector h_sub(n);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n; ++i) h_sub[i] = chan.wd_relay_gains(active[i], k);
    const double power = std::norm(wd_coeffs[k]) * cfg.message_variance[k];
    gram.noalias() += power * h_sub * h_sub.adjoint();
    rhs.noalias() += (wd_coeffs[k] * cfg.message_variance[k]) * h_sub;
  }
  const CVector w = gram.llt().solve(rhs);
  for (int i = 0; i < n; ++i)
    beta_hat[active[i]] =
        eta * std::conj(w[i]) / chan.relay_fc_gains[active[i]];
  return beta_hat;
}

//! Projection rule applied to the unconstrained candidate.
enum class RelayProjection {
  //! Orthogonal projection onto the per-coordinate magnitude caps: clip each
  //! coordinate's magnitude, keep its phase.
  MagnitudeClip,
  //! Compatibility rule that rescales over-cap coordinates by the whole
  //! candidate's vector norm instead of their own magnitude. Not an
  //! orthogonal projection onto the feasible region; kept for comparison.
  VectorNormScaled,
};

//! Maps a candidate onto the feasible region |beta_m|^2 <= cap_m.
inline CVector project_relay(const CVector& beta_hat, const RVector& caps,
                             RelayProjection rule =
                                 RelayProjection::MagnitudeClip) {
  if (caps.minCoeff() <= 0.0)
    throw std::invalid_argument("project_relay: caps must be positive");
  CVector beta = beta_hat;
  const double vector_norm = beta_hat.norm();
  for (Eigen::Index m = 0; m < beta.size(); ++m) {
    const double magnitude = std::abs(beta_hat[m]);
    const double radius = std::sqrt(caps[m]);
    if (magnitude <= radius) continue;
    const double divisor =
        rule == RelayProjection::MagnitudeClip ? magnitude : vector_norm;
    beta[m] = radius * beta_hat[m] / divisor;
  }
  return beta;
}

struct RelayBlockResult {
  CVector beta;
  double objective = 0.0; // K^2-scaled MSE at the returned coefficients
  bool converged = false;
  int iterations = 0;
};

namespace detail {

//! Quadratic form of the relay-stage objective restricted to relays with a
//! nonzero FC channel: F(b) = b^H Q b / eta^2 - 2 Re(lin^H b) / eta + constant.
struct RelayQuadratic {
  std::vector<int> active;
  CMatrix Q;
  CVector lin;
  double eta = 1.0;
  double constant = 0.0;
  double lipschitz = 0.0; // gradient Lipschitz constant 2 lambda_max(Q)/eta^2

  static RelayQuadratic build(const SystemConfig& cfg,
                              const ChannelRealization& chan,
                              const CVector& wd_coeffs, double eta) {
    RelayQuadratic f;
    f.eta = eta;
    const int K = cfg.num_wds;
    const int M = cfg.num_relays;
    for (int m = 0; m < M; ++m)
      if (chan.relay_fc_gains[m] != cdouble{0.0, 0.0}) f.active.push_back(m);
    const int n = static_cast<int>(f.active.size());
    f.Q = CMatrix::Zero(n, n);
    f.lin = CVector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int m = f.active[i];
      f.Q(i, i) = std::norm(chan.relay_fc_gains[m]) * cfg.relay_noise_power[m];
    }
    CVector v(n);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < n; ++i) {
        const int m = f.active[i];
        v[i] = wd_coeffs[k] * chan.relay_fc_gains[m] *
               chan.wd_relay_gains(m, k);
      }
      const double delta2 = cfg.message_variance[k];
      f.Q.noalias() += delta2 * v.conjugate() * v.transpose();
      f.lin.noalias() += delta2 * v.conjugate();
      f.constant += delta2;
    }
    f.constant += cfg.fc_noise_power / (eta * eta);
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<CMatrix> eig(f.Q,
                                                 Eigen::EigenvaluesOnly);
      f.lipschitz = 2.0 * eig.eigenvalues().maxCoeff() / (eta * eta);
    }
    return f;
  }

  CVector gather(const CVector& beta_full) const {
    CVector b(active.size());
    for (size_t i = 0; i < active.size(); ++i) b[i] = beta_full[active[i]];
    return b;
  }

  CVector scatter(const CVector& b, int M) const {
    CVector beta = CVector::Zero(M);
    for (size_t i = 0; i < active.size(); ++i) beta[active[i]] = b[i];
    return beta;
  }

  double value(const CVector& b) const {
    const cdouble quad = b.dot(Q * b); // b^H Q b
    return quad.real() / (eta * eta) - 2.0 * lin.dot(b).real() / eta +
           constant;
  }

  //! Real-equivalent gradient, as a complex vector.
  CVector gradient(const CVector& b) const {
    return 2.0 * (Q * b / (eta * eta) - lin / eta);
  }
};

inline CVector clip_to_caps(const CVector& b, const RVector& radius) {
  CVector out = b;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double magnitude = std::abs(b[i]);
    if (magnitude > radius[i]) out[i] *= radius[i] / magnitude;
  }
  return out;
}

} // namespace detail

//! Relay-coefficient block update for fixed WD coefficients and de-noising
//! factor.
//!
//! Computes the unconstrained candidate, clips it onto the per-coordinate
//! caps, then runs a projected-gradient refinement with Armijo backtracking
//! from the clipped point: for coupled channel Grams the clipped candidate is
//! not always the constrained optimum, and the refinement restores a
//! certified one. When `incoming` is supplied the better of the refined point
//! and the incoming coefficients is returned, so the update never increases
//! the objective it minimizes.
inline RelayBlockResult solve_relay_block(
    const SystemConfig& cfg, const ChannelRealization& chan,
    const CVector& wd_coeffs, double eta,
    const std::optional<CVector>& incoming = std::nullopt, double tol = 1e-8,
    int max_iters = 20000) {
  if (!(eta > 0.0))
    throw std::invalid_argument("solve_relay_block: eta must be > 0");
  const int M = cfg.num_relays;
  const RVector caps = relay_budget_caps(cfg, chan, wd_coeffs);
  const auto f = detail::RelayQuadratic::build(cfg, chan, wd_coeffs, eta);

  RelayBlockResult result;
  if (f.active.empty()) {
    result.beta = CVector::Zero(M);
    result.objective = f.constant;
    result.converged = true;
    return result;
  }

  RVector radius(f.active.size());
  for (size_t i = 0; i < f.active.size(); ++i)
    radius[i] = std::sqrt(caps[f.active[i]]);

  CVector b = f.gather(
      project_relay(mmse_candidate(cfg, chan, wd_coeffs, eta), caps));
  double value = f.value(b);

  const double probe = 1.0 / f.lipschitz;
  const double grad_scale =
      2.0 * f.lin.norm() / eta + f.lipschitz * radius.norm();
  double step = probe;
  int iterations = 0;
  bool converged = false;
  for (; iterations < max_iters; ++iterations) {
    const CVector grad = f.gradient(b);
    const CVector probe_point = detail::clip_to_caps(b - probe * grad, radius);
    const double pg_norm = (b - probe_point).norm() / probe;
    if (pg_norm <= tol * std::max(grad_scale, 1e-300)) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      const CVector b_try = detail::clip_to_caps(b - step * grad, radius);
      const double value_try = f.value(b_try);
      const double directional = (grad.dot(b_try - b)).real();
      if (value_try <= value + 1e-4 * directional && directional < 0.0) {
        b = b_try;
        value = value_try;
        accepted = true;
        if (bt == 0) step = std::min(step * 1.5, 1e6 * probe);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent direction left at line-search resolution.
      converged = pg_norm <= 1e3 * tol * std::max(grad_scale, 1e-300);
      break;
    }
  }

  CVector beta = f.scatter(b, M);
  double objective = value;
  if (incoming.has_value()) {
    const CVector incoming_clipped =
        f.scatter(detail::clip_to_caps(f.gather(*incoming), radius), M);
    const double incoming_value = f.value(f.gather(incoming_clipped));
    if (incoming_value < objective) {
      beta = incoming_clipped;
      objective = incoming_value;
    }
  }
  result.beta = std::move(beta);
  result.objective = objective;
  result.converged = converged;
  result.iterations = iterations;
  return result;
}

} // namespace aircomp
