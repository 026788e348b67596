// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <string>
#include <vector>

#include "thz/error.hpp"
#include "thz/observation.hpp"

namespace thz {

/// Least-squares estimator H_est = y Phi^+ with the pseudo-inverse
/// precomputed once per pilot matrix.
class LsEstimator {
 public:
  static constexpr double kMaxCondition = 1e12;

  explicit LsEstimator(const PilotMatrix& pilots) : antennas_(pilots.antennas()) {
    Eigen::BDCSVD<CMatrix> svd(pilots.phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
    condition_ = smin > 0.0 ? smax / smin : INFINITY;
    if (!(condition_ <= kMaxCondition))
      throw EstimationError("pilot matrix is rank deficient (condition number " +
                            std::to_string(condition_) + ")");
    // Phi^+ = V S^-1 U^H; the row-vector estimate y Phi^+ is (Phi^+)^T y.
    const CMatrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    apply_ = pinv.transpose();
  }

  CVector estimate(const CVector& y) const {
    if (y.size() != apply_.cols())
      throw DimensionError("observation length " + std::to_string(y.size()) +
                           " does not match " + std::to_string(apply_.cols()) + " pilots");
    return apply_ * y;
  }

  double condition_number() const { return condition_; }

 private:
  std::size_t antennas_;
  double condition_ = 0.0;
  CMatrix apply_;  // N x M
};

inline CVector ls_estimate(const CVector& y, const PilotMatrix& pilots) {
  return LsEstimator(pilots).estimate(y);
}

/// Empirical second-order statistics of the training split.
///   obs_cov   R_yy = (1/S) sum conj(y) y^T            (M x M, Hermitian)
///   cross_cov R_hy = (1/S) sum conj(h) y^T            (N x M)
/// and the linear MMSE gain G = (R_yy + eps I)^{-1} R_hy^H used as
/// H_est = y G, eps = 1e-6 trace(R_yy) / M.
struct MmseStatistics {
  CMatrix cross_cov;
  CMatrix obs_cov;
  std::size_t sample_count = 0;
  double ridge = 0.0;
  CMatrix gain;  // M x N
  std::vector<std::string> warnings;
};

inline MmseStatistics fit_mmse(const std::vector<ObservationSample>& train) {
  if (train.empty()) throw EstimationError("MMSE fit needs a non-empty training set");
  const Eigen::Index m = train.front().received.size();
  const Eigen::Index n = train.front().truth.size();
  MmseStatistics st;
  st.sample_count = train.size();
  st.obs_cov = CMatrix::Zero(m, m);
  st.cross_cov = CMatrix::Zero(n, m);
  for (const auto& s : train) {
    if (s.received.size() != m || s.truth.size() != n)
      throw DimensionError("training samples have inconsistent dimensions");
    st.obs_cov.noalias() += s.received.conjugate() * s.received.transpose();
    st.cross_cov.noalias() += s.truth.conjugate() * s.received.transpose();
  }
  const double inv = 1.0 / static_cast<double>(train.size());
  st.obs_cov *= inv;
  st.cross_cov *= inv;
  if (train.size() < 2 * static_cast<std::size_t>(m))
    st.warnings.push_back("MMSE statistics from " + std::to_string(train.size()) +
                          " samples (< 2M = " + std::to_string(2 * m) +
                          "); relying on ridge regularization");

  st.ridge = 1e-6 * st.obs_cov.trace().real() / static_cast<double>(m);
  if (!(st.ridge > 0.0)) st.ridge = 1e-12;
  CMatrix reg = st.obs_cov;
  reg.diagonal().array() += st.ridge;
  Eigen::LLT<CMatrix> llt(reg);
  if (llt.info() != Eigen::Success)
    throw NumericError("regularized observation covariance is not positive definite");
  st.gain = llt.solve(CMatrix(st.cross_cov.adjoint()));
  if (!st.gain.allFinite()) throw NumericError("MMSE gain is not finite");
  return st;
}

inline MmseStatistics fit_mmse(const Dataset& ds) { return fit_mmse(ds.train()); }

inline CVector mmse_estimate(const CVector& y, const MmseStatistics& st) {
  if (y.size() != st.gain.rows())
    throw DimensionError("observation length " + std::to_string(y.size()) +
                         " does not match fitted statistics (" + std::to_string(st.gain.rows()) + ")");
  return st.gain.transpose() * y;
}

}  // namespace thz
