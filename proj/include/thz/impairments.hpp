// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "thz/channel_model.hpp"
#include "thz/error.hpp"
#include "thz/random.hpp"

namespace thz {

/// Wiener phase-noise walks at the transmitter and receiver, one value per
/// pilot symbol.
struct PhaseNoiseTrajectory {
  RVector theta_tx;
  RVector theta_rx;
  double var_tx = 0.0;
  double var_rx = 0.0;
};

struct NoiseSpec {
  double snr_db = 0.0;
  double noise_var = 1.0;

  static NoiseSpec from_snr_db(double snr_db) {
    return {snr_db, std::pow(10.0, -snr_db / 10.0)};
  }
  /// Noise-free observations (infinite SNR).
  static NoiseSpec none() { return {INFINITY, 0.0}; }
};

/// theta[n] = theta[n-1] + N(0, var), theta[-1] = 0. Tx is drawn before Rx.
inline PhaseNoiseTrajectory draw_pn_trajectory(double var_tx, double var_rx, std::size_t m,
                                               Rng& rng) {
  if (!(var_tx >= 0.0) || !(var_rx >= 0.0))
    throw ConfigError("phase-noise variances must be non-negative");
  if (m < 1) throw ConfigError("trajectory length must be >= 1");
  PhaseNoiseTrajectory pn;
  pn.var_tx = var_tx;
  pn.var_rx = var_rx;
  const auto len = static_cast<Eigen::Index>(m);
  pn.theta_tx.resize(len);
  pn.theta_rx.resize(len);
  const double sd_tx = std::sqrt(var_tx);
  const double sd_rx = std::sqrt(var_rx);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < len; ++n) pn.theta_tx[n] = (acc += sd_tx * rng.normal());
  acc = 0.0;
  for (Eigen::Index n = 0; n < len; ++n) pn.theta_rx[n] = (acc += sd_rx * rng.normal());
  return pn;
}

inline PhaseNoiseTrajectory zero_phase_noise(std::size_t m) {
  const auto len = static_cast<Eigen::Index>(m);
  return {RVector::Zero(len), RVector::Zero(len), 0.0, 0.0};
}

/// Unit-modulus phasors e^{j(theta_T[m] - theta_R[m])}.
inline CVector pn_phasors(const PhaseNoiseTrajectory& pn) {
  CVector out(pn.theta_tx.size());
  for (Eigen::Index m = 0; m < out.size(); ++m)
    out[m] = std::polar(1.0, pn.theta_tx[m] - pn.theta_rx[m]);
  return out;
}

/// y[m] = e^{j(theta_T[m] - theta_R[m])} clean[m] + w[m], w ~ CN(0, sigma^2).
inline CVector apply_impairments(const CVector& clean, const PhaseNoiseTrajectory& pn,
                                 const NoiseSpec& noise, Rng& rng) {
  if (pn.theta_tx.size() != clean.size() || pn.theta_rx.size() != clean.size())
    throw DimensionError("phase-noise trajectory length " + std::to_string(pn.theta_tx.size()) +
                         " does not match observation length " + std::to_string(clean.size()));
  CVector y = clean.cwiseProduct(pn_phasors(pn));
  for (Eigen::Index m = 0; m < y.size(); ++m) y[m] += rng.complex_normal(noise.noise_var);
  return y;
}

}  // namespace thz
