#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sgmem/errors.hpp"

namespace sgmem::io {

// Little-endian primitives, written byte by byte so files are portable.
// Strings are a u32 length followed by raw bytes. Reads throw IoError on
// truncation.

inline void write_u8(std::ostream& os, uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& os, uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_u64(std::ostream& os, uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u32(os, bits);
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline uint8_t read_u8(std::istream& is) {
  int c = is.get();
  if (c == EOF) throw IoError("unexpected end of file");
  return static_cast<uint8_t>(c);
}

inline uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(read_u8(is)) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(read_u8(is)) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is) {
  uint32_t bits = read_u32(is);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline std::string read_string(std::istream& is) {
  uint32_t len = read_u32(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (static_cast<uint32_t>(is.gcount()) != len) {
    throw IoError("unexpected end of file while reading string");
  }
  return s;
}

inline void expect_magic(std::istream& is, const char* magic) {
  std::string want(magic);
  std::string got(want.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(want.size()));
  if (static_cast<size_t>(is.gcount()) != want.size() || got != want) {
    throw IoError("bad file magic, expected " + want);
  }
}

}  // namespace sgmem::io
