// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "thz/channel_model.hpp"
#include "thz/error.hpp"

namespace thz {

/// 10 log10 of the mean over samples of ||H - H_est||^2 / ||H||^2.
/// Returns -inf when every estimate is exact.
inline double nmse_db(const std::vector<CVector>& truth, const std::vector<CVector>& estimates) {
  if (truth.size() != estimates.size())
    throw DimensionError("NMSE needs equally many truths and estimates (" +
                         std::to_string(truth.size()) + " vs " +
                         std::to_string(estimates.size()) + ")");
  if (truth.empty()) throw DimensionError("NMSE of an empty sample set is undefined");
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != estimates[i].size())
      throw DimensionError("estimate " + std::to_string(i) + " has the wrong length");
    const double power = truth[i].squaredNorm();
    if (!(power > 0.0))
      throw NumericError("truth vector " + std::to_string(i) + " is all zero; NMSE undefined");
    acc += (truth[i] - estimates[i]).squaredNorm() / power;
  }
  return 10.0 * std::log10(acc / static_cast<double>(truth.size()));
}

}  // namespace thz
