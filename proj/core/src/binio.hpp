#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "relimp/error.hpp"

// Little-endian binary primitives shared by the corpus snapshot and the
// embedding checkpoint formats.
namespace relimp::binio {

inline void write_u8(std::ostream& out, std::uint8_t v) {
  out.put(char(v));
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, std::uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n,
                       const char* what) {
  if (!in.read(dst, std::streamsize(n)))
    throw DataError(std::string("truncated input while reading ") + what);
}

inline std::uint8_t read_u8(std::istream& in, const char* what) {
  char b;
  read_exact(in, &b, 1, what);
  return std::uint8_t(b);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
  char b[4];
  read_exact(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | std::uint8_t(b[i]);
  return v;
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
  char b[8];
  read_exact(in, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | std::uint8_t(b[i]);
  return v;
}

inline double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline std::string read_string(std::istream& in, const char* what) {
  std::uint32_t len = read_u32(in, what);
  std::string s(len, '\0');
  if (len) read_exact(in, s.data(), len, what);
  return s;
}

}  // namespace relimp::binio
