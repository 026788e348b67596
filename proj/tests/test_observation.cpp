// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "thz/dataset_io.hpp"
#include "thz/estimators.hpp"

using namespace thz;

namespace {
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("thz_obs_" + name)).string();
}

ScenarioConfig small_config(std::size_t n) {
  ScenarioConfig c = ScenarioConfig{}.with_antennas(n).with_pn(2e-4, 2e-4);
  c.seed = 42;
  return c;
}
}  // namespace

TEST(Pilots, TwoPointDft) {
  Rng rng(1);
  const PilotMatrix p = make_pilots(2, 2, PilotKind::UnitaryDft, rng);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_LT(std::abs(p.phi(0, 0) - cd(s, 0)), 1e-15);
  EXPECT_LT(std::abs(p.phi(0, 1) - cd(s, 0)), 1e-15);
  EXPECT_LT(std::abs(p.phi(1, 0) - cd(s, 0)), 1e-15);
  EXPECT_LT(std::abs(p.phi(1, 1) - cd(-s, 0)), 1e-15);
}

TEST(Pilots, DftIsUnitary) {
  Rng rng(1);
  for (std::size_t n : {16u, 64u, 128u}) {
    const PilotMatrix p = make_pilots(n, n, PilotKind::UnitaryDft, rng);
    const CMatrix gram = p.phi * p.phi.adjoint();
    const auto k = static_cast<Eigen::Index>(n);
    EXPECT_LT((gram - CMatrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index j = 0; j < k; ++j) EXPECT_NEAR(p.phi.col(j).norm(), 1.0, 1e-12);
  }
}

TEST(Pilots, QpskConstellation) {
  Rng rng(2);
  const PilotMatrix p = make_pilots(8, 12, PilotKind::RandomQpsk, rng);
  const double q = 1.0 / std::sqrt(16.0);
  for (Eigen::Index k = 0; k < 8; ++k)
    for (Eigen::Index j = 0; j < 12; ++j) {
      EXPECT_NEAR(std::abs(p.phi(k, j)), 1.0 / std::sqrt(8.0), 1e-15);
      EXPECT_DOUBLE_EQ(std::abs(p.phi(k, j).real()), q);
      EXPECT_DOUBLE_EQ(std::abs(p.phi(k, j).imag()), q);
    }
}

TEST(Pilots, IdentityAndShapeErrors) {
  Rng rng(3);
  const PilotMatrix p = make_pilots(4, 4, PilotKind::Identity, rng);
  EXPECT_TRUE(p.phi == CMatrix::Identity(4, 4));
  EXPECT_THROW(make_pilots(4, 6, PilotKind::UnitaryDft, rng), ConfigError);
  EXPECT_THROW(make_pilots(4, 6, PilotKind::Identity, rng), ConfigError);
  EXPECT_NO_THROW(make_pilots(4, 6, PilotKind::RandomQpsk, rng));
  EXPECT_EQ(parse_pilot_kind("random-qpsk"), PilotKind::RandomQpsk);
  EXPECT_EQ(to_string(PilotKind::UnitaryDft), "unitary-dft");
  EXPECT_THROW(parse_pilot_kind("hadamard"), ConfigError);
}

TEST(Preprocess, OrderingIsRealThenImaginary) {
  CVector y(2);
  y << cd(1, 2), cd(3, -4);
  const RVector x = preprocess(y);
  ASSERT_EQ(x.size(), 4);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(x[1], 3.0);
  EXPECT_EQ(x[2], 2.0);
  EXPECT_EQ(x[3], -4.0);
}

TEST(Preprocess, RealInputHasZeroSecondHalf) {
  CVector y(3);
  y << cd(1, 0), cd(-2, 0), cd(5, 0);
  EXPECT_TRUE(preprocess(y).tail(3).isZero(0.0));
}

TEST(Preprocess, RoundTripIsLossless) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    CVector y(17);
    for (auto& v : y) v = rng.complex_normal(3.0);
    EXPECT_TRUE(unpreprocess(preprocess(y)) == y);
  }
  EXPECT_THROW(unpreprocess(RVector::Zero(3)), DimensionError);
}

TEST(Synthesize, UnitChannelSelectsFirstPilotRow) {
  Rng rng(5);
  const PilotMatrix p = make_pilots(8, 8, PilotKind::UnitaryDft, rng);
  CVector h = CVector::Zero(8);
  h[0] = 1.0;
  const auto s = synthesize_observation(h, p, zero_phase_noise(8), NoiseSpec::none(), rng);
  EXPECT_LT((s.received - p.phi.row(0).transpose()).norm(), 1e-15);
  EXPECT_TRUE(s.features == preprocess(s.received));
}

TEST(Synthesize, ChannelRecoverableWithoutImpairments) {
  const ScenarioConfig c = small_config(32);
  Rng rng(6);
  const PilotMatrix p = make_pilots(32, 32, PilotKind::UnitaryDft, rng);
  const auto ch = draw_channel(c, rng);
  const auto s = synthesize_observation(ch.channel, p, zero_phase_noise(32), NoiseSpec::none(), rng);
  const CVector back = (s.received.transpose() * p.phi.adjoint()).transpose();
  EXPECT_LE((back - ch.channel).norm(), 1e-12 * ch.channel.norm());
}

TEST(Synthesize, NoisePowerIsMSigmaSquared) {
  const ScenarioConfig c = small_config(16);
  Rng rng(7);
  const PilotMatrix p = make_pilots(16, 16, PilotKind::UnitaryDft, rng);
  const NoiseSpec noise = NoiseSpec::from_snr_db(3.0);
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto ch = draw_channel(c, rng);
    const auto pn = draw_pn_trajectory(c.pn_var_tx, c.pn_var_rx, 16, rng);
    const auto s = synthesize_observation(ch.channel, p, pn, noise, rng);
    const CVector clean = (p.phi.transpose() * ch.channel).cwiseProduct(pn_phasors(pn));
    acc += (s.received - clean).squaredNorm();
  }
  EXPECT_NEAR(acc / trials, 16.0 * noise.noise_var, 0.05 * 16.0 * noise.noise_var);
}

TEST(Synthesize, RejectsDimensionMismatch) {
  Rng rng(8);
  const PilotMatrix p = make_pilots(8, 8, PilotKind::UnitaryDft, rng);
  EXPECT_THROW(
      synthesize_observation(CVector::Zero(4), p, zero_phase_noise(8), NoiseSpec::none(), rng),
      DimensionError);
}

TEST(Dataset, ShapeAndSplit) {
  const Dataset ds = generate_dataset(small_config(16), 50, 10.0);
  EXPECT_EQ(ds.size(), 50u);
  EXPECT_EQ(ds.train_size(), 40u);
  EXPECT_EQ(ds.test_size(), 10u);
  for (const auto& s : ds.samples) {
    EXPECT_EQ(s.features.size(), 32);
    EXPECT_EQ(s.truth.size(), 16);
    EXPECT_DOUBLE_EQ(s.snr_db, 10.0);
  }
  EXPECT_TRUE(ds.test().front().truth == ds.samples[40].truth);
}

TEST(Dataset, FiveSamplesSplitFourOne) {
  const Dataset ds = generate_dataset(small_config(8), 5, 0.0);
  EXPECT_EQ(ds.train().size(), 4u);
  EXPECT_EQ(ds.test().size(), 1u);
  EXPECT_EQ(train_split_index(6000), 4800u);
}

TEST(Dataset, ReferenceScaleShape) {
  const Dataset ds = generate_dataset(ScenarioConfig{}.with_pn(2e-6, 2e-6), 6000, 10.0);
  EXPECT_EQ(ds.size(), 6000u);
  EXPECT_EQ(ds.samples.back().features.size(), 128);
  EXPECT_EQ(ds.train_size(), 4800u);
}

TEST(Dataset, IndependentOfWorkerCount) {
  const auto manifest = make_manifest(small_config(16), 37, 5.0, PilotKind::RandomQpsk);
  const Dataset a = generate_dataset(manifest, 1);
  const Dataset b = generate_dataset(manifest, 4);
  EXPECT_EQ(encode_dataset(a), encode_dataset(b));
}

TEST(Dataset, ManifestRecordsDistanceOverride) {
  const auto m = make_manifest(ScenarioConfig{}, 10, 0.0, PilotKind::UnitaryDft);
  EXPECT_TRUE(m.distance_override);
  EXPECT_EQ(m.far_paths, 2u);
  EXPECT_EQ(m.near_paths, 2u);
  EXPECT_EQ(m.format_version, kDatasetFormatVersion);
}

TEST(DatasetIo, SaveLoadRoundTrip) {
  const Dataset ds = generate_dataset(small_config(16), 20, 15.0, PilotKind::RandomQpsk);
  const std::string path = temp_path("rt.thzd");
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  EXPECT_TRUE(back.manifest == ds.manifest);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.split_index, ds.split_index);
  EXPECT_TRUE(back.pilots.phi == ds.pilots.phi);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_TRUE(back.samples[i].received == ds.samples[i].received);
    EXPECT_TRUE(back.samples[i].truth == ds.samples[i].truth);
    EXPECT_TRUE(back.samples[i].features == ds.samples[i].features);
  }
  EXPECT_EQ(encode_dataset(back), io::read_file(path));
  std::filesystem::remove(path);
}

TEST(DatasetIo, RegenerationIsByteIdentical) {
  const auto cfg = small_config(16);
  EXPECT_EQ(encode_dataset(generate_dataset(cfg, 30, 0.0)),
            encode_dataset(generate_dataset(cfg, 30, 0.0)));
  const Dataset ds = generate_dataset(cfg, 30, 0.0);
  EXPECT_EQ(encode_dataset(generate_dataset(ds.manifest)), encode_dataset(ds));
}

TEST(DatasetIo, TruncatedFileIsChecksumError) {
  auto bytes = encode_dataset(generate_dataset(small_config(8), 10, 0.0));
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_dataset(bytes), ChecksumError);
  auto flipped = encode_dataset(generate_dataset(small_config(8), 10, 0.0));
  flipped[flipped.size() / 2] ^= 0x40;
  EXPECT_THROW(decode_dataset(flipped), ChecksumError);
}

TEST(DatasetIo, ForeignMagicNamesExpected) {
  auto bytes = encode_dataset(generate_dataset(small_config(8), 3, 0.0));
  bytes[0] = 'X';
  try {
    decode_dataset(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("THZD"), std::string::npos);
  }
}

TEST(DatasetIo, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset(temp_path("does_not_exist.thzd")), IoError);
}

TEST(DatasetIo, CsvExportLayout) {
  const Dataset ds = generate_dataset(small_config(4), 3, 0.0);
  const std::string path = temp_path("export.csv");
  export_dataset_csv(ds, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header,
            "re_y_1,re_y_2,re_y_3,re_y_4,im_y_1,im_y_2,im_y_3,im_y_4,"
            "re_h_1,re_h_2,re_h_3,re_h_4,im_h_1,im_h_2,im_h_3,im_h_4");
  int rows = 0;
  std::getline(in, row);
  ++rows;
  std::vector<double> vals;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) vals.push_back(parse_double(cell));
  ASSERT_EQ(vals.size(), 16u);
  EXPECT_EQ(vals[0], ds.samples[0].received[0].real());
  EXPECT_EQ(vals[4], ds.samples[0].received[0].imag());
  EXPECT_EQ(vals[15], ds.samples[0].truth[3].imag());
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 3);
  std::filesystem::remove(path);
}

TEST(Dataset, LsRecoversChannelWithoutImpairments) {
  ScenarioConfig c = small_config(32).with_pn(0.0, 0.0);
  const Dataset ds = generate_dataset(c, 20, 400.0);
  const LsEstimator ls(ds.pilots);
  for (const auto& s : ds.samples)
    EXPECT_LE((ls.estimate(s.received) - s.truth).norm(), 1e-10 * s.truth.norm());
}
