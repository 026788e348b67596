// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "thz/error.hpp"

namespace thz::io {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1U << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

/// Little-endian byte sink.
class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void uint(T v) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFU));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void string(std::string_view s) {
    uint<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  /// Appends the CRC-32 of everything written so far.
  void seal() { uint(crc32(buf_.data(), buf_.size())); }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader; overruns raise FormatError.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  void need(std::size_t n) const {
    if (n > size_ - pos_)
      throw FormatError("unexpected end of data at offset " + std::to_string(pos_));
  }
  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string string() {
    const auto n = uint<std::uint64_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return bytes;
}

/// Checks magic and CRC trailer of a sealed container and returns a reader
/// positioned just after the magic, limited to the payload.
inline ByteReader open_sealed(const std::vector<std::uint8_t>& bytes, std::string_view magic) {
  if (bytes.size() < magic.size() ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw FormatError("bad magic: expected \"" + std::string(magic) + "\"");
  if (bytes.size() < magic.size() + 4)
    throw ChecksumError("file too short to carry a CRC-32 trailer");
  const std::size_t body = bytes.size() - 4;
  ByteReader trailer(bytes.data() + body, 4);
  const auto stored = trailer.uint<std::uint32_t>();
  const auto actual = crc32(bytes.data(), body);
  if (stored != actual) throw ChecksumError("CRC-32 mismatch (file truncated or corrupted)");
  return ByteReader(bytes.data() + magic.size(), body - magic.size());
}

}  // namespace thz::io
