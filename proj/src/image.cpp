#include "arousal/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace arousal {

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

GrayImage to_gray(const RgbImage& rgb) {
  GrayImage out(rgb.height(), rgb.width());
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = luma(rgb.r(i, j), rgb.g(i, j), rgb.b(i, j));
  return out;
}

namespace {

// Source coordinate for a destination pixel centre, plus the two taps and the
// blend weight of the second one.
struct Tap {
  Index lo, hi;
  double frac;
};

Tap source_tap(Index dst, Index dst_size, Index src_size) {
  const double scale = static_cast<double>(src_size) / static_cast<double>(dst_size);
  double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
  const auto lo = static_cast<Index>(std::floor(s));
  const Index hi = std::min(lo + 1, src_size - 1);
  return {lo, hi, s - static_cast<double>(lo)};
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& src, Index height, Index width) {
  if (height <= 0 || width <= 0 || src.size() == 0) throw DataError("resize_bilinear: empty image or target");
  if (src.rows() == height && src.cols() == width) return src;
  GrayImage out(height, width);
  for (Index i = 0; i < height; ++i) {
    const Tap ty = source_tap(i, height, src.rows());
    for (Index j = 0; j < width; ++j) {
      const Tap tx = source_tap(j, width, src.cols());
      const double top = (1.0 - tx.frac) * src(ty.lo, tx.lo) + tx.frac * src(ty.lo, tx.hi);
      const double bot = (1.0 - tx.frac) * src(ty.hi, tx.lo) + tx.frac * src(ty.hi, tx.hi);
      const double v = (1.0 - ty.frac) * top + ty.frac * bot;
      out(i, j) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

GrayImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open file");
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P6") throw LoadError(path.string(), "not a binary PGM/PPM (magic '" + magic + "')");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(next_token(in));
    h = std::stol(next_token(in));
    maxval = std::stol(next_token(in));
  } catch (const std::exception&) {
    throw LoadError(path.string(), "malformed header");
  }
  if (w <= 0 || h <= 0) throw LoadError(path.string(), "invalid dimensions");
  if (maxval != 255) throw LoadError(path.string(), "maxval must be 255");

  const std::size_t channels = magic == "P5" ? 1 : 3;
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w * h) * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw LoadError(path.string(), "truncated pixel data");

  GrayImage out(h, w);
  if (channels == 1) {
    std::copy(buf.begin(), buf.end(), out.data());
  } else {
    for (Index k = 0; k < out.size(); ++k) out.data()[k] = luma(buf[3 * k], buf[3 * k + 1], buf[3 * k + 2]);
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (Index k = 0; k < img.r.size(); ++k) {
    const char px[3] = {static_cast<char>(img.r.data()[k]), static_cast<char>(img.g.data()[k]),
                        static_cast<char>(img.b.data()[k])};
    out.write(px, 3);
  }
}

}  // namespace arousal
