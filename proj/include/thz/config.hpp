// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "thz/error.hpp"

namespace thz {

/// Physical and experimental parameters of one scenario. Default values are
/// the reference simulation parameters (100 GHz carrier, L = 4, gamma = 0.5,
/// near-field distances 10..80 m, initial PN variances 0.1 / 0.2 rad^2).
struct ScenarioConfig {
  std::size_t num_antennas = 64;
  std::size_t num_pilots = 64;
  std::size_t total_paths = 4;
  double gamma = 0.5;
  double carrier_freq = 100e9;
  double light_speed = 3e8;
  double antenna_spacing = 0.0015;  // half wavelength at 100 GHz
  double distance_min = 10.0;
  double distance_max = 80.0;
  double pn_var_tx = 0.1;
  double pn_var_rx = 0.2;
  std::vector<double> snr_grid{0.0, 5.0, 10.0, 15.0, 20.0};
  std::uint64_t seed = 1;

  double wavelength() const { return light_speed / carrier_freq; }
  double aperture() const {
    return static_cast<double>(num_antennas - 1) * antenna_spacing;
  }

  /// Copy with N changed and M tied to it.
  ScenarioConfig with_antennas(std::size_t n) const {
    ScenarioConfig out = *this;
    out.num_antennas = n;
    out.num_pilots = n;
    return out;
  }

  ScenarioConfig with_pn(double var_tx, double var_rx) const {
    ScenarioConfig out = *this;
    out.pn_var_tx = var_tx;
    out.pn_var_rx = var_rx;
    return out;
  }
};

/// Far/near split of the L paths. gamma*L is rounded half up.
struct PathSplit {
  std::size_t far = 0;
  std::size_t near = 0;
  bool rounded = false;
};

inline PathSplit split_paths(const ScenarioConfig& cfg) {
  const double exact = cfg.gamma * static_cast<double>(cfg.total_paths);
  const double far = std::floor(exact + 0.5);
  PathSplit split;
  split.far = static_cast<std::size_t>(far);
  split.near = cfg.total_paths - split.far;
  split.rounded = std::abs(far - exact) > 1e-12;
  return split;
}

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.num_antennas < 2) throw ConfigError("num_antennas must be >= 2");
  if (cfg.num_pilots < 1) throw ConfigError("num_pilots must be >= 1");
  if (cfg.total_paths < 1) throw ConfigError("total_paths must be >= 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(cfg.carrier_freq > 0.0) || !(cfg.light_speed > 0.0))
    throw ConfigError("carrier_freq and light_speed must be positive");
  if (!(cfg.antenna_spacing > 0.0)) throw ConfigError("antenna_spacing must be positive");
  if (!(cfg.distance_max > cfg.distance_min))
    throw ConfigError("distance_max must exceed distance_min");
  if (!(cfg.distance_min > cfg.aperture()))
    throw ConfigError("distance_min must exceed the array aperture (" +
                      std::to_string(cfg.aperture()) + " m)");
  if (!(cfg.pn_var_tx >= 0.0) || !(cfg.pn_var_rx >= 0.0))
    throw ConfigError("phase-noise variances must be non-negative");
  for (double s : cfg.snr_grid)
    if (!std::isfinite(s)) throw ConfigError("snr_grid entries must be finite");
}

/// Training hyperparameters of the learned estimators.
struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double val_fraction = 0.1;
  std::size_t threads = 1;
  std::uint64_t seed = 1;
};

/// Named experiment scales.
enum class Profile { Desk, Paper };

struct ProfileSettings {
  std::size_t samples = 2000;
  std::size_t hidden_units = 16;  // 0 means "use N"
  std::vector<std::size_t> antenna_grid{16, 64};
};

inline ProfileSettings profile_settings(Profile p) {
  if (p == Profile::Paper) return {6000, 0, {64, 128}};
  return {2000, 16, {16, 64}};
}

inline const std::vector<double>& default_pn_grid() {
  static const std::vector<double> grid{2e-6, 2e-5, 2e-4};
  return grid;
}

/// Reference parameters with the initial PN variances 0.1 / 0.2.
inline ScenarioConfig reference_preset() { return ScenarioConfig{}; }

/// Experiment preset: reference parameters with the smallest swept PN
/// variance on both sides.
inline ScenarioConfig experiment_preset() {
  return ScenarioConfig{}.with_pn(2e-6, 2e-6);
}

}  // namespace thz
