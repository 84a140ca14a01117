#ifndef FPPO_FIDELITY_HPP_
#define FPPO_FIDELITY_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "fppo/core.hpp"
#include "fppo/operators.hpp"

namespace fppo {

/// f2(u) = 0.5 ||Ku - b||^2.
struct GaussianFidelity {
  SpectralOperator K;
  Image b;
};

/// f2(u) = sum_i (b - Ku)_i^2 / (Ku)_i, with (Ku)_i clamped from below.
struct RayleighFidelity {
  SpectralOperator K;
  Image b;
  double floor = 1e-3;  // on the [0,255] intensity scale
};

inline double gaussian_value(const GaussianFidelity& F, const Image& u) {
  require_same_shape(F.b, u, "gaussian_value");
  Image r = F.K.apply(u);
  double s = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    double d = r.pixels[i] - F.b.pixels[i];
    s += d * d;
  }
  return 0.5 * s;
}

inline Image gaussian_gradient(const GaussianFidelity& F, const Image& u) {
  require_same_shape(F.b, u, "gaussian_gradient");
  Image r = F.K.apply(u);
  for (size_t i = 0; i < r.size(); ++i) r.pixels[i] -= F.b.pixels[i];
  return F.K.apply_adjoint(r);
}

inline double rayleigh_value(const RayleighFidelity& F, const Image& u) {
  require_same_shape(F.b, u, "rayleigh_value");
  Image s = F.K.apply(u);
  double v = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    double si = std::max(s.pixels[i], F.floor);
    double d = F.b.pixels[i] - s.pixels[i];
    v += d * d / si;
  }
  return v;
}

// d/ds [(b - s)^2 / s] = 1 - b^2 / s^2, so grad f2 = K^T (1 - b^2/(Ku)^2).
inline Image rayleigh_gradient(const RayleighFidelity& F, const Image& u) {
  require_same_shape(F.b, u, "rayleigh_gradient");
  Image s = F.K.apply(u);
  for (size_t i = 0; i < s.size(); ++i) {
    double si = std::max(s.pixels[i], F.floor);
    double bi = F.b.pixels[i];
    s.pixels[i] = 1.0 - bi * bi / (si * si);
  }
  return F.K.apply_adjoint(s);
}

using Fidelity = std::variant<GaussianFidelity, RayleighFidelity>;

inline double fidelity_value(const Fidelity& F, const Image& u) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFidelity>)
          return gaussian_value(f, u);
        else
          return rayleigh_value(f, u);
      },
      F);
}

inline Image fidelity_gradient(const Fidelity& F, const Image& u) {
  return std::visit(
      [&](const auto& f) -> Image {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFidelity>)
          return gaussian_gradient(f, u);
        else
          return rayleigh_gradient(f, u);
      },
      F);
}

/// Value range used to bound the Rayleigh Hessian.
struct ValueBox {
  double lo = 0.0;
  double hi = 0.0;
};

/// Co-coercivity constant beta of grad f2 (1/beta-Lipschitz gradient).
/// Gaussian: exact, 1 / lambda_max(K^T K). Rayleigh: best-effort lower
/// bound from the Hessian bound 2 lambda_max(K^T K) max(b^2 / (Ku)^3)
/// over the clamped box; not a certificate (f2 need not be convex).
inline double estimate_beta(const Fidelity& F, const ValueBox& box = {1.0, 255.0}) {
  if (box.hi < box.lo) throw std::invalid_argument("estimate_beta: empty box");
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        double lam_ktk = f.K.max_abs2_transfer();
        if constexpr (std::is_same_v<T, GaussianFidelity>) {
          return 1.0 / lam_ktk;
        } else {
          double b2max = 0.0;
          for (double bi : f.b.pixels) b2max = std::max(b2max, bi * bi);
          double smin = std::max(box.lo, f.floor);
          double lipschitz = 2.0 * lam_ktk * b2max / (smin * smin * smin);
          return 1.0 / lipschitz;
        }
      },
      F);
}

}  // namespace fppo

#endif  // FPPO_FIDELITY_HPP_
