#ifndef FPPO_METRICS_HPP_
#define FPPO_METRICS_HPP_

#include <cmath>

#include "fppo/core.hpp"

namespace fppo {

inline constexpr double kPsnrCap = 200.0;  // sentinel for a zero-error pair

/// 10 log10(255^2 N / ||u - ref||^2), capped at kPsnrCap dB.
inline double psnr(const Image& u, const Image& u_ref) {
  require_same_shape(u, u_ref, "psnr");
  double err2 = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    double d = u.pixels[i] - u_ref.pixels[i];
    err2 += d * d;
  }
  if (err2 == 0.0) return kPsnrCap;
  double n = static_cast<double>(u.size());
  double value = 10.0 * std::log10(255.0 * 255.0 * n / err2);
  return std::min(value, kPsnrCap);
}

/// Isotropic TV of a dual field: sum of per-pixel Euclidean magnitudes.
inline double tv_isotropic(const DualField& p) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    s += std::sqrt(p.channel_x[i] * p.channel_x[i] +
                   p.channel_y[i] * p.channel_y[i]);
  }
  return s;
}

}  // namespace fppo

#endif  // FPPO_METRICS_HPP_
