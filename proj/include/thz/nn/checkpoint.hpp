// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "thz/binary_io.hpp"
#include "thz/nn/model.hpp"

namespace thz::nn {

inline constexpr std::string_view kCheckpointMagic = "THZM";
inline constexpr std::uint16_t kCheckpointVersion = 1;

inline std::string canonical_spec(const ModelSpec& s) {
  const nlohmann::json j = {{"arch", to_string(s.arch)},
                            {"seq_len", s.seq_len},
                            {"features_per_step", s.features_per_step},
                            {"hidden_units", s.hidden_units},
                            {"output_dim", s.output_dim},
                            {"dnn_hidden", s.dnn_hidden}};
  return j.dump();
}

inline ModelSpec spec_from_text(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelSpec s;
    s.arch = parse_arch(j.at("arch").get<std::string>());
    s.seq_len = j.at("seq_len").get<std::size_t>();
    s.features_per_step = j.at("features_per_step").get<std::size_t>();
    s.hidden_units = j.at("hidden_units").get<std::size_t>();
    s.output_dim = j.at("output_dim").get<std::size_t>();
    s.dnn_hidden = j.at("dnn_hidden").get<std::vector<std::size_t>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model spec: ") + e.what());
  }
}

struct Checkpoint {
  ModelSpec spec;
  ModelParams params;
};

/// "THZM", u16 version, length-prefixed spec JSON, u64 tensor count, then per
/// tensor a length-prefixed name, u64 rows, u64 cols and rows*cols f64 in
/// column-major order; CRC-32 trailer over all preceding bytes.
inline std::vector<std::uint8_t> encode_checkpoint(const ModelSpec& spec, const ModelParams& params) {
  io::ByteWriter w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.uint<std::uint16_t>(kCheckpointVersion);
  w.string(canonical_spec(spec));
  w.uint<std::uint64_t>(params.size());
  for (const auto& t : params.tensors) {
    w.string(t.name);
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(t.value.rows()));
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.size(); ++i) w.f64(t.value.data()[i]);
  }
  w.seal();
  return w.buffer();
}

inline Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r = io::open_sealed(bytes, kCheckpointMagic);
  const auto version = r.uint<std::uint16_t>();
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.spec = spec_from_text(r.string());
  validate(ck.spec);
  const ModelParams expected = zero_params(ck.spec);
  const auto count = r.uint<std::uint64_t>();
  if (count != expected.size()) throw FormatError("checkpoint tensor count does not match its spec");
  ck.params = expected;
  for (auto& t : ck.params.tensors) {
    const std::string name = r.string();
    const auto rows = r.uint<std::uint64_t>();
    const auto cols = r.uint<std::uint64_t>();
    if (name != t.name || rows != static_cast<std::uint64_t>(t.value.rows()) ||
        cols != static_cast<std::uint64_t>(t.value.cols()))
      throw FormatError("checkpoint tensor '" + name + "' does not match the spec layout");
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = r.f64();
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint tensors");
  return ck;
}

inline void save_checkpoint(const ModelSpec& spec, const ModelParams& params, const std::string& path) {
  io::write_file(path, encode_checkpoint(spec, params));
}

inline Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace thz::nn
