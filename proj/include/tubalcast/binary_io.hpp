#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "tubalcast/error.hpp"

// Little-endian primitives shared by the T3F, M3F and NPK1 formats.
namespace tubalcast::binio {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf{};
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
  os.write(buf.data(), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  std::array<unsigned char, 8> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), 8);
  require(is.gcount() == 8, ErrorKind::FormatError, "unexpected end of stream");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | buf[b];
  return v;
}

inline void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }
inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(magic.size()));
  require(is.gcount() == static_cast<std::streamsize>(magic.size()) && got == magic,
          ErrorKind::FormatError, "bad magic, expected \"" + std::string(magic) + "\"");
}

}  // namespace tubalcast::binio
