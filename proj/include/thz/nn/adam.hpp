// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "thz/config.hpp"
#include "thz/nn/model.hpp"

namespace thz::nn {

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::size_t step = 0;
  std::size_t skipped = 0;

  static AdamState for_params(const ModelParams& p) { return {p.zeros_like(), p.zeros_like(), 0, 0}; }
};

/// One bias-corrected Adam update at step t (t >= 1). A non-finite gradient
/// is rejected: nothing changes, `skipped` is incremented and false returned.
inline bool adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
                      std::size_t t, const TrainConfig& cfg) {
  if (t < 1) throw ConfigError("Adam step index must be >= 1");
  if (!grads.all_finite()) {
    ++state.skipped;
    return false;
  }
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    const auto g = grads[i].array();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    params[i].array() -= cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
  }
  state.step = t;
  ++params.revision;
  return true;
}

}  // namespace thz::nn
