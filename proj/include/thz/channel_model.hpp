// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "thz/config.hpp"
#include "thz/error.hpp"
#include "thz/random.hpp"

namespace thz {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

struct FarPath {
  cd gain;
  double angle = 0.0;  // rad, [-pi/2, pi/2]
};

struct NearPath {
  cd gain;
  double angle = 0.0;     // rad, [-pi/2, pi/2]
  double distance = 0.0;  // m, scatterer to array centre
};

enum class FieldRegion { Near, Far };

struct ChannelRealization {
  std::vector<FarPath> far_paths;
  std::vector<NearPath> near_paths;
  CVector channel;  // length N, already scaled by sqrt(N / (L_f + L_nf))
  double rayleigh_distance = 0.0;
};

/// Unit-norm plane-wave response of an N-element half-wavelength ULA.
inline CVector far_steering(double theta, std::size_t n) {
  CVector a(static_cast<Eigen::Index>(n));
  const double phase = std::numbers::pi * std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k)
    a[static_cast<Eigen::Index>(k)] = std::polar(scale, phase * static_cast<double>(k));
  return a;
}

/// Element offsets from the array centre in units of d: (2k - N - 1) / 2.
inline RVector element_offsets(std::size_t n) {
  RVector psi(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k)
    psi[static_cast<Eigen::Index>(k - 1)] =
        (2.0 * static_cast<double>(k) - static_cast<double>(n) - 1.0) / 2.0;
  return psi;
}

/// Distance from each element to a scatterer at (delta, theta) relative to
/// the array centre (law of cosines).
inline RVector near_element_distances(double delta, double theta, std::size_t n, double d) {
  if (!(delta > 0.0)) throw GeometryError("scatterer distance must be positive");
  const RVector psi = element_offsets(n);
  RVector xi(psi.size());
  const double s = std::sin(theta);
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    const double off = psi[k] * d;
    const double sq = delta * delta + off * off - 2.0 * delta * off * s;
    const double dist = std::sqrt(std::max(sq, 0.0));
    if (!(dist > 1e-9))
      throw GeometryError("element " + std::to_string(k + 1) +
                          " coincides with the scatterer (distance " + std::to_string(dist) + " m)");
    xi[k] = dist;
  }
  return xi;
}

/// xi_k - delta without cancellation: (off^2 - 2 delta off sin(theta)) / (xi_k + delta).
inline RVector near_path_differences(double delta, double theta, std::size_t n, double d) {
  const RVector xi = near_element_distances(delta, theta, n, d);
  const RVector psi = element_offsets(n);
  const double s = std::sin(theta);
  RVector diff(xi.size());
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    const double off = psi[k] * d;
    diff[k] = (off * off - 2.0 * delta * off * s) / (xi[k] + delta);
  }
  return diff;
}

/// Unit-norm spherical-wavefront response: amplitude delta/xi_k, phase
/// -2*pi*f/c*(xi_k - delta), then normalized by the norm of that vector.
/// The phase sign matches far_steering() in the large-distance limit.
inline CVector near_steering(double delta, double theta, std::size_t n, double d,
                             double freq, double c) {
  const RVector xi = near_element_distances(delta, theta, n, d);
  const RVector diff = near_path_differences(delta, theta, n, d);
  const double wavenumber = 2.0 * std::numbers::pi * freq / c;
  CVector a(xi.size());
  for (Eigen::Index k = 0; k < xi.size(); ++k)
    a[k] = std::polar(delta / xi[k], -wavenumber * diff[k]);
  return a / a.norm();
}

/// 2 D^2 / lambda with D = (N - 1) d.
inline double rayleigh_distance(std::size_t n, double d, double freq, double c) {
  const double aperture = static_cast<double>(n - 1) * d;
  return 2.0 * aperture * aperture / (c / freq);
}

inline double rayleigh_distance(const ScenarioConfig& cfg) {
  return rayleigh_distance(cfg.num_antennas, cfg.antenna_spacing, cfg.carrier_freq,
                           cfg.light_speed);
}

inline FieldRegion classify_region(double distance, double rayleigh) {
  return distance < rayleigh ? FieldRegion::Near : FieldRegion::Far;
}

/// Interval near-path distances are drawn from. Clipped below the Rayleigh
/// distance; when the configured range lies entirely beyond it the interval
/// falls back to [0.1 Omega, Omega) and `overridden` is set.
struct DistanceRange {
  double lo = 0.0;
  double hi = 0.0;
  bool overridden = false;
};

inline DistanceRange near_distance_range(const ScenarioConfig& cfg) {
  const double omega = rayleigh_distance(cfg);
  const double upper = omega * (1.0 - 1e-6);
  DistanceRange r{cfg.distance_min, std::min(cfg.distance_max, upper), false};
  if (r.lo >= r.hi) {
    // FIXME: for N <= 11 at half-wavelength spacing 0.1 Omega lies inside the
    // aperture; it is clamped to D, which leaves a very thin interval.
    r = {std::max(0.1 * omega, cfg.aperture()), upper, true};
    if (r.lo >= r.hi)
      throw ConfigError("near-field region is empty: Rayleigh distance " +
                        std::to_string(omega) + " m does not exceed the aperture");
  }
  return r;
}

/// Recomputes the normalized hybrid channel from path parameters.
inline CVector assemble_channel(const std::vector<FarPath>& far_paths,
                                const std::vector<NearPath>& near_paths, std::size_t n,
                                double d, double freq, double c) {
  CVector h = CVector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& p : far_paths) h += p.gain * far_steering(p.angle, n);
  for (const auto& p : near_paths) h += p.gain * near_steering(p.distance, p.angle, n, d, freq, c);
  const std::size_t paths = far_paths.size() + near_paths.size();
  if (paths > 0) h *= std::sqrt(static_cast<double>(n) / static_cast<double>(paths));
  return h;
}

inline CVector assemble_channel(const ChannelRealization& r, const ScenarioConfig& cfg) {
  return assemble_channel(r.far_paths, r.near_paths, cfg.num_antennas, cfg.antenna_spacing,
                          cfg.carrier_freq, cfg.light_speed);
}

/// Path gains are unit modulus with uniform phase (zero-mean, unit-variance,
/// circular); angles uniform on [-pi/2, pi/2]; near distances uniform on
/// near_distance_range().
inline ChannelRealization draw_channel(const ScenarioConfig& cfg, Rng& rng) {
  validate(cfg);
  const PathSplit split = split_paths(cfg);
  const double half_pi = std::numbers::pi / 2.0;

  ChannelRealization r;
  r.rayleigh_distance = rayleigh_distance(cfg);
  r.far_paths.reserve(split.far);
  for (std::size_t l = 0; l < split.far; ++l) {
    FarPath p;
    p.gain = std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
    p.angle = rng.uniform(-half_pi, half_pi);
    r.far_paths.push_back(p);
  }
  if (split.near > 0) {
    const DistanceRange range = near_distance_range(cfg);
    r.near_paths.reserve(split.near);
    for (std::size_t l = 0; l < split.near; ++l) {
      NearPath p;
      p.gain = std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
      p.angle = rng.uniform(-half_pi, half_pi);
      p.distance = rng.uniform(range.lo, range.hi);
      r.near_paths.push_back(p);
    }
  }
  r.channel = assemble_channel(r, cfg);
  return r;
}

}  // namespace thz
