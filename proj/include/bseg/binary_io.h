#pragma once

// Little-endian scalar encoding shared by the BGG1 / BTF1 / BGM1 formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

#include "bseg/errors.h"

namespace bseg::binio {

template <typename UInt>
void put_uint(std::ostream& out, UInt v) {
  char bytes[sizeof(UInt)];
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(UInt));
}

template <typename UInt>
UInt get_uint(std::istream& in) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw DataError("unexpected end of binary stream");
  }
  UInt v = 0;
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    v |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return v;
}

inline void put_f32(std::ostream& out, float v) {
  put_uint<uint32_t>(out, std::bit_cast<uint32_t>(v));
}
inline float get_f32(std::istream& in) {
  return std::bit_cast<float>(get_uint<uint32_t>(in));
}
inline void put_f64(std::ostream& out, double v) {
  put_uint<uint64_t>(out, std::bit_cast<uint64_t>(v));
}
inline double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_uint<uint64_t>(in));
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[8] = {};
  if (magic.size() > sizeof(buf) ||
      !in.read(buf, static_cast<std::streamsize>(magic.size())) ||
      std::memcmp(buf, magic.data(), magic.size()) != 0) {
    throw DataError("bad magic, expected " + std::string(magic));
  }
}

}  // namespace bseg::binio
