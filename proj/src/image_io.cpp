#include "mast/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "mast/error.hpp"
#include "mast/tensor_io.hpp"

namespace mast {
namespace {

std::size_t read_header_int(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  std::size_t v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + static_cast<std::size_t>(s[pos] - '0');
    if (v > 1u << 20) fail(ErrorKind::FormatError, "PGM header value too large");
    ++pos;
  }
  if (pos == start) fail(ErrorKind::FormatError, "malformed PGM header");
  return v;
}

}  // namespace

Tensor decode_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail(ErrorKind::FormatError, "not a P5 PGM");
  std::size_t pos = 2;
  const std::size_t w = read_header_int(bytes, pos);
  const std::size_t h = read_header_int(bytes, pos);
  const std::size_t maxval = read_header_int(bytes, pos);
  if (w == 0 || h == 0) fail(ErrorKind::FormatError, "PGM with zero extent");
  if (maxval != 255) fail(ErrorKind::FormatError, "PGM maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorKind::FormatError, "malformed PGM header");
  }
  ++pos;
  if (bytes.size() - pos != w * h) fail(ErrorKind::FormatError, "PGM payload length mismatch");
  Tensor out({h, w});
  for (std::size_t i = 0; i < w * h; ++i) {
    out[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) / 255.0f;
  }
  return out;
}

Tensor read_pgm(const std::filesystem::path& path) {
  const auto raw = read_file_bytes(path);
  return decode_pgm(std::string(raw.begin(), raw.end()));
}

PgmScaling write_pgm_minmax(const std::filesystem::path& path, const Tensor& img) {
  require_rank(img, 2, "write_pgm_minmax");
  const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
  PgmScaling scaling{*lo, *hi};
  const double range = scaling.max - scaling.min;
  std::string header = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (float v : img.values()) {
    const double unit = range > 0.0 ? (v - scaling.min) / range : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(unit, 0.0, 1.0) * 255.0)));
  }
  write_file_bytes(path, out);
  return scaling;
}

}  // namespace mast
