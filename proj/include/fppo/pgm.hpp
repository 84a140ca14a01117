#ifndef FPPO_PGM_HPP_
#define FPPO_PGM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fppo/core.hpp"

namespace fppo {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline int next_pgm_token(std::istream& is) {
  // Skips whitespace and '#' comment lines between header tokens.
  while (true) {
    int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int value;
  if (!(is >> value)) throw IoError("pgm: malformed header");
  return value;
}
}  // namespace detail

/// Reads a binary (P5) PGM, 8- or 16-bit (big-endian per the format).
inline Image load_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("pgm: cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw IoError("pgm: not a P5 file: " + path);
  int w = detail::next_pgm_token(is);
  int h = detail::next_pgm_token(is);
  int maxval = detail::next_pgm_token(is);
  is.get();  // single whitespace before raster
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError("pgm: bad header in " + path);

  Image img(h, w);
  if (maxval < 256) {
    std::vector<unsigned char> raw(img.size());
    is.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (!is) throw IoError("pgm: truncated raster in " + path);
    for (size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i];
  } else {
    std::vector<unsigned char> raw(img.size() * 2);
    is.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (!is) throw IoError("pgm: truncated raster in " + path);
    for (size_t i = 0; i < img.size(); ++i) {
      img.pixels[i] = 256.0 * raw[2 * i] + raw[2 * i + 1];
    }
    // Rescale 16-bit data onto the nominal [0,255] range.
    for (auto& p : img.pixels) p *= 255.0 / maxval;
  }
  return img;
}

/// Writes an 8-bit P5 PGM, rounding and clipping to [0,255].
inline void save_pgm(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("pgm: cannot write " + path);
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    double v = std::round(img.pixels[i]);
    raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  if (!os) throw IoError("pgm: write failed for " + path);
}

/// Lossless sidecar: little-endian doubles preceded by height and width.
inline void save_raw_sidecar(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("raw: cannot write " + path);
  std::int64_t h = img.height, w = img.width;
  os.write(reinterpret_cast<const char*>(&h), sizeof(h));
  os.write(reinterpret_cast<const char*>(&w), sizeof(w));
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.size() * sizeof(double)));
  if (!os) throw IoError("raw: write failed for " + path);
}

inline Image load_raw_sidecar(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("raw: cannot open " + path);
  std::int64_t h = 0, w = 0;
  is.read(reinterpret_cast<char*>(&h), sizeof(h));
  is.read(reinterpret_cast<char*>(&w), sizeof(w));
  if (!is || h <= 0 || w <= 0) throw IoError("raw: bad header in " + path);
  Image img(static_cast<int>(h), static_cast<int>(w));
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.size() * sizeof(double)));
  if (!is) throw IoError("raw: truncated data in " + path);
  return img;
}

}  // namespace fppo

#endif  // FPPO_PGM_HPP_
