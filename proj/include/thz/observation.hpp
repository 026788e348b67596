// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "thz/channel_model.hpp"
#include "thz/config.hpp"
#include "thz/error.hpp"
#include "thz/impairments.hpp"
#include "thz/random.hpp"

namespace thz {

/// unitary-dft: Phi[k, m] = e^{-j 2 pi k m / N} / sqrt(N).
/// identity: antenna-sequential sounding, pilot m is sent from antenna m.
/// random-qpsk: i.i.d. {+-1 +- j} / sqrt(2N).
enum class PilotKind { UnitaryDft, Identity, RandomQpsk };

inline std::string to_string(PilotKind kind) {
  switch (kind) {
    case PilotKind::UnitaryDft: return "unitary-dft";
    case PilotKind::Identity: return "identity";
    case PilotKind::RandomQpsk: return "random-qpsk";
  }
  return "unknown";
}

inline PilotKind parse_pilot_kind(const std::string& s) {
  if (s == "unitary-dft") return PilotKind::UnitaryDft;
  if (s == "identity") return PilotKind::Identity;
  if (s == "random-qpsk") return PilotKind::RandomQpsk;
  throw ConfigError("unknown pilot kind '" + s + "' (expected unitary-dft, identity or random-qpsk)");
}

/// Known N x M pilot matrix. Columns carry unit total transmit power, so
/// with ||H||^2 = N the per-observation SNR is 1 / sigma^2.
struct PilotMatrix {
  CMatrix phi;
  PilotKind kind = PilotKind::UnitaryDft;

  std::size_t antennas() const { return static_cast<std::size_t>(phi.rows()); }
  std::size_t pilots() const { return static_cast<std::size_t>(phi.cols()); }
};

inline PilotMatrix make_pilots(std::size_t n, std::size_t m, PilotKind kind, Rng& rng) {
  if (n < 1 || m < 1) throw ConfigError("pilot matrix dimensions must be >= 1");
  PilotMatrix p;
  p.kind = kind;
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(m);
  p.phi.resize(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (kind == PilotKind::UnitaryDft) {
    if (n != m)
      throw ConfigError("unitary-dft pilots need M = N (got N=" + std::to_string(n) +
                        ", M=" + std::to_string(m) + ")");
    for (Eigen::Index k = 0; k < rows; ++k)
      for (Eigen::Index j = 0; j < cols; ++j) {
        // k*j mod N keeps the argument small for large N.
        const auto kj = static_cast<double>((k * j) % rows);
        p.phi(k, j) = std::polar(scale, -2.0 * std::numbers::pi * kj / static_cast<double>(n));
      }
  } else if (kind == PilotKind::Identity) {
    if (n != m)
      throw ConfigError("identity pilots need M = N (got N=" + std::to_string(n) +
                        ", M=" + std::to_string(m) + ")");
    p.phi.setIdentity();
  } else {
    const double q = scale / std::numbers::sqrt2;
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index k = 0; k < rows; ++k) {
        const std::uint64_t bits = rng.next_u64();
        p.phi(k, j) = cd((bits & 1U) ? q : -q, (bits & 2U) ? q : -q);
      }
  }
  return p;
}

/// [Re(y_1..y_M), Im(y_1..y_M)].
inline RVector preprocess(const CVector& y) {
  const Eigen::Index m = y.size();
  RVector x(2 * m);
  x.head(m) = y.real();
  x.tail(m) = y.imag();
  return x;
}

inline CVector unpreprocess(const RVector& x) {
  if (x.size() % 2 != 0) throw DimensionError("feature vector length must be even");
  const Eigen::Index m = x.size() / 2;
  CVector y(m);
  for (Eigen::Index i = 0; i < m; ++i) y[i] = cd(x[i], x[m + i]);
  return y;
}

struct ObservationSample {
  CVector received;  // y, length M
  RVector features;  // X, length 2M
  CVector truth;     // H, length N
  double snr_db = 0.0;
  double pn_var_tx = 0.0;
  double pn_var_rx = 0.0;
};

/// y = phasors .* (H Phi) + w for a row-vector channel H.
inline ObservationSample synthesize_observation(const CVector& h, const PilotMatrix& pilots,
                                                const PhaseNoiseTrajectory& pn,
                                                const NoiseSpec& noise, Rng& rng) {
  if (static_cast<std::size_t>(h.size()) != pilots.antennas())
    throw DimensionError("channel length " + std::to_string(h.size()) +
                         " does not match pilot rows " + std::to_string(pilots.antennas()));
  const CVector clean = pilots.phi.transpose() * h;
  ObservationSample s;
  s.received = apply_impairments(clean, pn, noise, rng);
  s.features = preprocess(s.received);
  s.truth = h;
  s.snr_db = noise.snr_db;
  s.pn_var_tx = pn.var_tx;
  s.pn_var_rx = pn.var_rx;
  return s;
}

inline constexpr std::uint16_t kDatasetFormatVersion = 1;

/// Everything needed to regenerate a dataset bit-identically.
struct DatasetManifest {
  ScenarioConfig scenario;
  std::size_t sample_count = 0;
  double snr_db = 0.0;
  PilotKind pilot_kind = PilotKind::UnitaryDft;
  double train_fraction = 0.8;
  std::size_t far_paths = 0;
  std::size_t near_paths = 0;
  bool gamma_rounded = false;
  bool distance_override = false;
  double near_distance_lo = 0.0;
  double near_distance_hi = 0.0;
  std::uint16_t format_version = kDatasetFormatVersion;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.num_antennas == b.num_antennas && a.num_pilots == b.num_pilots &&
         a.total_paths == b.total_paths && a.gamma == b.gamma &&
         a.carrier_freq == b.carrier_freq && a.light_speed == b.light_speed &&
         a.antenna_spacing == b.antenna_spacing && a.distance_min == b.distance_min &&
         a.distance_max == b.distance_max && a.pn_var_tx == b.pn_var_tx &&
         a.pn_var_rx == b.pn_var_rx && a.snr_grid == b.snr_grid && a.seed == b.seed;
}

struct Dataset {
  std::vector<ObservationSample> samples;
  DatasetManifest manifest;
  std::size_t split_index = 0;  // samples[0, split_index) train, rest test
  PilotMatrix pilots;

  std::size_t size() const { return samples.size(); }
  std::size_t train_size() const { return split_index; }
  std::size_t test_size() const { return samples.size() - split_index; }

  std::vector<ObservationSample> train() const {
    return {samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(split_index)};
  }
  std::vector<ObservationSample> test() const {
    return {samples.begin() + static_cast<std::ptrdiff_t>(split_index), samples.end()};
  }
};

inline std::size_t train_split_index(std::size_t s, double fraction = 0.8) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(s)));
}

inline DatasetManifest make_manifest(const ScenarioConfig& cfg, std::size_t s, double snr_db,
                                     PilotKind kind) {
  validate(cfg);
  DatasetManifest m;
  m.scenario = cfg;
  m.sample_count = s;
  m.snr_db = snr_db;
  m.pilot_kind = kind;
  const PathSplit split = split_paths(cfg);
  m.far_paths = split.far;
  m.near_paths = split.near;
  m.gamma_rounded = split.rounded;
  if (split.near > 0) {
    const DistanceRange r = near_distance_range(cfg);
    m.distance_override = r.overridden;
    m.near_distance_lo = r.lo;
    m.near_distance_hi = r.hi;
  }
  return m;
}

inline PilotMatrix dataset_pilots(const DatasetManifest& m) {
  Rng rng = Rng::substream(m.scenario.seed, 0, StreamPurpose::Pilots);
  return make_pilots(m.scenario.num_antennas, m.scenario.num_pilots, m.pilot_kind, rng);
}

/// Draws sample `index` of a dataset. Every random quantity comes from a
/// substream keyed by (seed, index, purpose).
inline ObservationSample draw_sample(const ScenarioConfig& cfg, const PilotMatrix& pilots,
                                     const NoiseSpec& noise, std::size_t index) {
  Rng channel_rng = Rng::substream(cfg.seed, index, StreamPurpose::Channel);
  Rng pn_rng = Rng::substream(cfg.seed, index, StreamPurpose::PhaseNoise);
  Rng noise_rng = Rng::substream(cfg.seed, index, StreamPurpose::Noise);
  const ChannelRealization ch = draw_channel(cfg, channel_rng);
  const PhaseNoiseTrajectory pn =
      draw_pn_trajectory(cfg.pn_var_tx, cfg.pn_var_rx, cfg.num_pilots, pn_rng);
  return synthesize_observation(ch.channel, pilots, pn, noise, noise_rng);
}

inline Dataset generate_dataset(const DatasetManifest& manifest, std::size_t threads = 1) {
  if (manifest.sample_count < 1) throw ConfigError("dataset needs at least one sample");
  const ScenarioConfig& cfg = manifest.scenario;
  Dataset ds;
  ds.manifest = manifest;
  ds.pilots = dataset_pilots(manifest);
  ds.split_index = train_split_index(manifest.sample_count, manifest.train_fraction);
  ds.samples.resize(manifest.sample_count);
  const NoiseSpec noise = NoiseSpec::from_snr_db(manifest.snr_db);

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, manifest.sample_count));
  if (workers == 1) {
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      ds.samples[i] = draw_sample(cfg, ds.pilots, noise, i);
    return ds;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < ds.samples.size(); i += workers)
          ds.samples[i] = draw_sample(cfg, ds.pilots, noise, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return ds;
}

inline Dataset generate_dataset(const ScenarioConfig& cfg, std::size_t s, double snr_db,
                                PilotKind kind = PilotKind::UnitaryDft, std::size_t threads = 1) {
  return generate_dataset(make_manifest(cfg, s, snr_db, kind), threads);
}

}  // namespace thz
