#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <boost/crc.hpp>

#include "lpturb/diagnostics.hpp"

namespace lpturb {

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init and xorout all ones).
using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true>;

inline std::uint64_t crc64(const void* data, std::size_t size) {
  Crc64 c;
  c.process_bytes(data, size);
  return c.checksum();
}

// File checksums use a different polynomial: a snapshot ends in its own
// CRC-64/XZ, so the XZ CRC of the whole file is the constant residue.
using Crc64Iso = boost::crc_optimal<64, 0x1BULL, ~0ULL, ~0ULL, true, true>;

template <class Crc = Crc64Iso>
std::uint64_t crc64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open '" + path + "'");
  Crc c;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    c.process_bytes(buf.data(), std::size_t(in.gcount()));
  }
  return c.checksum();
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 15];
  return s;
}

namespace snapshot_format {

inline constexpr char magic[8] = {'L', 'P', 'T', 'U', 'R', 'B', '0', '1'};
inline constexpr std::uint32_t version = 1;
inline constexpr std::size_t tag_bytes = 16;
// magic, version, n, L, t, field_count
inline constexpr std::size_t fixed_header = 8 + 4 + 4 + 8 + 8 + 4;

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace snapshot_format

inline std::vector<unsigned char> encode_snapshot(const Snapshot& s) {
  namespace f = snapshot_format;
  const GridSpec& g = common_grid({s});
  std::vector<unsigned char> out;
  out.reserve(f::fixed_header + s.fields.size() * (f::tag_bytes + 3 * g.points() * 8) + 8);
  out.insert(out.end(), f::magic, f::magic + 8);
  f::put<std::uint32_t>(out, f::version);
  f::put<std::uint32_t>(out, std::uint32_t(g.n));
  f::put<double>(out, g.L);
  f::put<double>(out, s.t);
  f::put<std::uint32_t>(out, std::uint32_t(s.fields.size()));
  for (const auto& [tag, field] : s.fields) {
    require(!tag.empty() && tag.size() <= f::tag_bytes, ErrorKind::input, "field tag '" + tag + "' must be 1-16 bytes");
    for (char c : tag) require(c > 0x20 && c < 0x7f, ErrorKind::input, "field tag '" + tag + "' is not printable ASCII");
    char buf[f::tag_bytes] = {};
    std::memcpy(buf, tag.data(), tag.size());
    out.insert(out.end(), buf, buf + f::tag_bytes);
  }
  for (const auto& [tag, field] : s.fields)
    for (double v : field.data) f::put<double>(out, v);
  f::put<std::uint64_t>(out, crc64(out.data(), out.size()));
  return out;
}

inline Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  namespace f = snapshot_format;
  const std::size_t size = bytes.size();
  auto need = [&](std::size_t end, const char* what) {
    if (size < end) throw FormatError(ErrorKind::io, std::string("truncated snapshot: ") + what, size);
  };
  need(8, "magic");
  if (std::memcmp(bytes.data(), f::magic, 8) != 0) throw FormatError(ErrorKind::format, "bad snapshot magic", 0);
  need(f::fixed_header, "header");
  const unsigned char* p = bytes.data();
  const auto ver = f::get<std::uint32_t>(p + 8);
  if (ver != f::version)
    throw FormatError(ErrorKind::unsupported_version, "unsupported snapshot version " + std::to_string(ver), 8);
  const auto n = f::get<std::uint32_t>(p + 12);
  const double L = f::get<double>(p + 16);
  const double t = f::get<double>(p + 24);
  const auto count = f::get<std::uint32_t>(p + 32);
  GridSpec g{int(n), L};
  if (n > 4096 || !GridSpec::is_power_of_two(int(n)) || n < 16)
    throw FormatError(ErrorKind::format, "invalid grid size " + std::to_string(n), 12);
  if (!(std::isfinite(L) && L > 0.0)) throw FormatError(ErrorKind::format, "invalid domain length", 16);
  if (count == 0 || count > 64) throw FormatError(ErrorKind::format, "invalid field count " + std::to_string(count), 32);
  const std::size_t tags_end = f::fixed_header + count * f::tag_bytes;
  const std::size_t payload = 3 * g.points() * 8;
  const std::size_t total = tags_end + count * payload + 8;
  need(total, "payload");
  if (size > total) throw FormatError(ErrorKind::format, "trailing bytes after snapshot", total);
  const auto stored = f::get<std::uint64_t>(p + total - 8);
  if (stored != crc64(p, total - 8)) throw FormatError(ErrorKind::format, "snapshot CRC mismatch", total - 8);
  Snapshot s;
  s.t = t;
  for (std::uint32_t i = 0; i < count; ++i) {
    const char* tp = reinterpret_cast<const char*>(p + f::fixed_header + i * f::tag_bytes);
    std::string tag(tp, strnlen(tp, f::tag_bytes));
    if (tag.empty()) throw FormatError(ErrorKind::format, "empty field tag", f::fixed_header + i * f::tag_bytes);
    RealVectorField v(g);
    const unsigned char* src = p + tags_end + i * payload;
    if constexpr (std::endian::native == std::endian::little)
      std::memcpy(v.data.data(), src, payload);
    else
      for (std::size_t k = 0; k < v.data.size(); ++k) v.data[k] = f::get<double>(src + 8 * k);
    s.fields.emplace_back(std::move(tag), std::move(v));
  }
  return s;
}

inline void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorKind::io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  require(bool(out), ErrorKind::io, "write to '" + path + "' failed");
}

inline std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::io, "cannot open '" + path + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_snapshot(const std::string& path, const Snapshot& s) { write_bytes(path, encode_snapshot(s)); }

inline Snapshot read_snapshot(const std::string& path) { return decode_snapshot(read_bytes(path)); }

}  // namespace lpturb
