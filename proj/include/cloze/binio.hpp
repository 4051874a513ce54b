#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "cloze/error.hpp"

// Little-endian primitives for the model file formats.
namespace cloze::binio {

inline void write_bytes(std::ostream& out, const void* data, size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& in, void* data, size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    fail(Err::BadModelFile, "truncated file");
  }
}

inline void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  write_bytes(out, b, 4);
}

inline uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  read_bytes(in, b, 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

inline void write_u64(std::ostream& out, uint64_t v) {
  write_u32(out, static_cast<uint32_t>(v));
  write_u32(out, static_cast<uint32_t>(v >> 32));
}

inline uint64_t read_u64(std::istream& in) {
  uint64_t lo = read_u32(in);
  uint64_t hi = read_u32(in);
  return lo | hi << 32;
}

inline void write_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

inline float read_f32(std::istream& in) {
  uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

inline double read_f64(std::istream& in) {
  uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in) {
  uint32_t n = read_u32(in);
  if (n > (1u << 24)) fail(Err::BadModelFile, "implausible string length");
  std::string s(n, '\0');
  if (n) read_bytes(in, s.data(), n);
  return s;
}

inline void expect_magic(std::istream& in, const char magic[4]) {
  char got[4];
  read_bytes(in, got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    fail(Err::BadModelFile,
         std::string("bad magic, expected ") + std::string(magic, 4));
  }
}

}  // namespace cloze::binio
