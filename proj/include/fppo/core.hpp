#ifndef FPPO_CORE_HPP_
#define FPPO_CORE_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fppo {

/// Real-valued image grid, row-major, nominal range [0,255].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("Image: nonpositive shape");
  }

  double& at(int i, int j) { return pixels[static_cast<size_t>(i) * width + j]; }
  double at(int i, int j) const { return pixels[static_cast<size_t>(i) * width + j]; }
  size_t size() const { return pixels.size(); }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width;
  }
};

/// Two-channel dual field: forward x- and y-difference grids of an image.
struct DualField {
  int height = 0;
  int width = 0;
  std::vector<double> channel_x;
  std::vector<double> channel_y;

  DualField() = default;
  DualField(int h, int w, double fill = 0.0)
      : height(h), width(w),
        channel_x(static_cast<size_t>(h) * w, fill),
        channel_y(static_cast<size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("DualField: nonpositive shape");
  }

  size_t size() const { return channel_x.size(); }

  bool same_shape(const DualField& o) const {
    return height == o.height && width == o.width;
  }
};

inline void require_same_shape(const Image& a, const Image& b, const char* where) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

inline double dot(const Image& a, const Image& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.pixels[i] * b.pixels[i];
  return s;
}

inline double dot(const DualField& a, const DualField& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    s += a.channel_x[i] * b.channel_x[i] + a.channel_y[i] * b.channel_y[i];
  }
  return s;
}

inline double norm2(const Image& a) { return std::sqrt(dot(a, a)); }
inline double norm2(const DualField& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Image& a) {
  for (double x : a.pixels)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const DualField& a) {
  for (size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.channel_x[i]) || !std::isfinite(a.channel_y[i])) return false;
  return true;
}

// y += c * x
inline void axpy(double c, const Image& x, Image& y) {
  for (size_t i = 0; i < x.size(); ++i) y.pixels[i] += c * x.pixels[i];
}

inline void axpy(double c, const DualField& x, DualField& y) {
  for (size_t i = 0; i < x.size(); ++i) {
    y.channel_x[i] += c * x.channel_x[i];
    y.channel_y[i] += c * x.channel_y[i];
  }
}

inline Image subtract(const Image& a, const Image& b) {
  Image r(a.height, a.width);
  for (size_t i = 0; i < a.size(); ++i) r.pixels[i] = a.pixels[i] - b.pixels[i];
  return r;
}

inline DualField subtract(const DualField& a, const DualField& b) {
  DualField r(a.height, a.width);
  for (size_t i = 0; i < a.size(); ++i) {
    r.channel_x[i] = a.channel_x[i] - b.channel_x[i];
    r.channel_y[i] = a.channel_y[i] - b.channel_y[i];
  }
  return r;
}

}  // namespace fppo

#endif  // FPPO_CORE_HPP_
