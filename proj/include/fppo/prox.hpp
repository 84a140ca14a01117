#ifndef FPPO_PROX_HPP_
#define FPPO_PROX_HPP_

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fppo/core.hpp"

namespace fppo {

/// Effective shrinkage radius of the isotropic TV prox.
struct TVThreshold {
  double t = 0.0;
  explicit TVThreshold(double value) : t(value) {
    if (t < 0.0) throw std::invalid_argument("TVThreshold: negative radius");
  }
};

/// Per-pixel isotropic shrinkage: w -> w * max(1 - t/|w|, 0), |w| the
/// Euclidean magnitude of the (x, y) pair. Minimizes t|x| + 0.5|x - w|^2.
inline DualField prox_tv_isotropic(const DualField& v, TVThreshold t) {
  DualField out(v.height, v.width);
  for (size_t i = 0; i < v.size(); ++i) {
    double wx = v.channel_x[i];
    double wy = v.channel_y[i];
    double r = std::sqrt(wx * wx + wy * wy);
    double f = (r > t.t) ? (1.0 - t.t / r) : 0.0;
    out.channel_x[i] = f * wx;
    out.channel_y[i] = f * wy;
  }
  return out;
}

/// I - prox: per-pixel output magnitude is at most t.
inline DualField residual_prox(const DualField& v, TVThreshold t) {
  DualField out(v.height, v.width);
  for (size_t i = 0; i < v.size(); ++i) {
    double wx = v.channel_x[i];
    double wy = v.channel_y[i];
    double r = std::sqrt(wx * wx + wy * wy);
    if (r > t.t) {
      double f = t.t / r;
      out.channel_x[i] = f * wx;
      out.channel_y[i] = f * wy;
    } else {
      out.channel_x[i] = wx;
      out.channel_y[i] = wy;
    }
  }
  return out;
}

/// Brute-force prox of t * ||.||_2 on a 2-vector: line search along the ray
/// from the origin through v at resolution grid_step. Test oracle; agrees
/// with the closed form within 2 * grid_step.
inline std::array<double, 2> prox_oracle_1d(const std::array<double, 2>& v,
                                            double t, double grid_step) {
  if (grid_step <= 0.0) throw std::invalid_argument("prox_oracle_1d: grid_step <= 0");
  double r = std::sqrt(v[0] * v[0] + v[1] * v[1]);
  if (r == 0.0) return {0.0, 0.0};
  // Minimizer lies on the segment [0, v] of the ray; scan radius s in [0, r].
  double best_s = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  auto consider = [&](double s) {
    double d = s - r;
    double obj = t * s + 0.5 * d * d;
    if (obj < best_obj) {
      best_obj = obj;
      best_s = s;
    }
  };
  for (double s = 0.0; s <= r + grid_step * 0.5; s += grid_step) consider(s);
  consider(r);  // include the endpoint so t = 0 returns v exactly
  double f = best_s / r;
  return {f * v[0], f * v[1]};
}

}  // namespace fppo

#endif  // FPPO_PROX_HPP_
