#ifndef FPPO_OPERATORS_HPP_
#define FPPO_OPERATORS_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fppo/core.hpp"
#include "fppo/fft.hpp"
#include "fppo/rng.hpp"

namespace fppo {

enum class KernelKind { box, gaussian, delta, custom };

/// Small convolution kernel (point-spread function). Box and gaussian taps
/// are normalized to sum 1; delta is a single unit tap.
struct BlurKernel {
  int side = 1;
  KernelKind kind = KernelKind::delta;
  std::vector<double> taps;  // side x side, row-major

  static BlurKernel delta_kernel() {
    BlurKernel k;
    k.side = 1;
    k.kind = KernelKind::delta;
    k.taps = {1.0};
    return k;
  }

  static BlurKernel box(int side) {
    if (side <= 0) throw std::invalid_argument("box kernel: side must be positive");
    BlurKernel k;
    k.side = side;
    k.kind = KernelKind::box;
    k.taps.assign(static_cast<size_t>(side) * side,
                  1.0 / (static_cast<double>(side) * side));
    return k;
  }

  static BlurKernel gaussian(int side, double sigma) {
    if (side <= 0 || sigma <= 0.0)
      throw std::invalid_argument("gaussian kernel: side and sigma must be positive");
    BlurKernel k;
    k.side = side;
    k.kind = KernelKind::gaussian;
    k.taps.resize(static_cast<size_t>(side) * side);
    double c = 0.5 * (side - 1);  // continuous center, even sides land between taps
    double sum = 0.0;
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        double d2 = (i - c) * (i - c) + (j - c) * (j - c);
        double t = std::exp(-d2 / (2.0 * sigma * sigma));
        k.taps[static_cast<size_t>(i) * side + j] = t;
        sum += t;
      }
    }
    for (auto& t : k.taps) t /= sum;
    return k;
  }

  static BlurKernel custom(int side, std::vector<double> taps) {
    BlurKernel k;
    k.side = side;
    k.kind = KernelKind::custom;
    k.taps = std::move(taps);
    if (k.taps.size() != static_cast<size_t>(side) * side)
      throw std::invalid_argument("custom kernel: tap count does not match side");
    return k;
  }
};

/// Shift-invariant linear operator diagonalized on the frequency grid
/// (periodic boundary conditions). Immutable after construction.
struct SpectralOperator {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> transfer;

  SpectralOperator() = default;
  SpectralOperator(int h, int w, std::complex<double> fill = {0.0, 0.0})
      : height(h), width(w), transfer(static_cast<size_t>(h) * w, fill) {}

  static SpectralOperator identity(int h, int w) {
    return SpectralOperator(h, w, {1.0, 0.0});
  }

  Image apply(const Image& x) const {
    check(x);
    std::vector<std::complex<double>> buf(x.pixels.begin(), x.pixels.end());
    detail::fft2d(buf, height, width);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] *= transfer[i];
    detail::ifft2d(buf, height, width);
    Image out(height, width);
    for (size_t i = 0; i < buf.size(); ++i) out.pixels[i] = buf[i].real();
    return out;
  }

  Image apply_adjoint(const Image& x) const {
    check(x);
    std::vector<std::complex<double>> buf(x.pixels.begin(), x.pixels.end());
    detail::fft2d(buf, height, width);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] *= std::conj(transfer[i]);
    detail::ifft2d(buf, height, width);
    Image out(height, width);
    for (size_t i = 0; i < buf.size(); ++i) out.pixels[i] = buf[i].real();
    return out;
  }

  double min_real_transfer() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : transfer) m = std::min(m, z.real());
    return m;
  }

  double max_abs2_transfer() const {
    double m = 0.0;
    for (const auto& z : transfer) m = std::max(m, std::norm(z));
    return m;
  }

 private:
  void check(const Image& x) const {
    if (x.height != height || x.width != width)
      throw std::invalid_argument("SpectralOperator: shape mismatch");
  }
};

/// Forward differences with periodic wrap: B : R^N -> R^(2N).
inline DualField grad(const Image& u) {
  DualField p(u.height, u.width);
  for (int i = 0; i < u.height; ++i) {
    int ip = (i + 1 == u.height) ? 0 : i + 1;
    for (int j = 0; j < u.width; ++j) {
      int jp = (j + 1 == u.width) ? 0 : j + 1;
      size_t k = static_cast<size_t>(i) * u.width + j;
      p.channel_x[k] = u.at(i, jp) - u.at(i, j);
      p.channel_y[k] = u.at(ip, j) - u.at(i, j);
    }
  }
  return p;
}

/// Exact adjoint of grad (negative periodic divergence).
inline Image grad_adjoint(const DualField& p) {
  Image u(p.height, p.width);
  for (int i = 0; i < p.height; ++i) {
    int im = (i == 0) ? p.height - 1 : i - 1;
    for (int j = 0; j < p.width; ++j) {
      int jm = (j == 0) ? p.width - 1 : j - 1;
      size_t k = static_cast<size_t>(i) * p.width + j;
      size_t kxm = static_cast<size_t>(i) * p.width + jm;
      size_t kym = static_cast<size_t>(im) * p.width + j;
      u.pixels[k] = p.channel_x[kxm] - p.channel_x[k] + p.channel_y[kym] - p.channel_y[k];
    }
  }
  return u;
}

/// Transfer of B^T B, the periodic 5-point Laplacian:
/// 4 sin^2(pi ki / h) + 4 sin^2(pi kj / w). Real, in [0, 8].
inline SpectralOperator laplacian_operator(int h, int w) {
  SpectralOperator op(h, w);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < h; ++i) {
    double sy = std::sin(pi * i / h);
    for (int j = 0; j < w; ++j) {
      double sx = std::sin(pi * j / w);
      op.transfer[static_cast<size_t>(i) * w + j] = 4.0 * (sy * sy + sx * sx);
    }
  }
  return op;
}

/// Spectral form of the blur K. The kernel is anchored at floor(side/2) so
/// the delta kernel maps to the identity transfer; even sides therefore
/// carry a half-pixel shift.
inline SpectralOperator blur_operator(const BlurKernel& kernel, int h, int w) {
  if (kernel.side > std::min(h, w))
    throw std::invalid_argument("blur_operator: kernel larger than image");
  std::vector<std::complex<double>> psf(static_cast<size_t>(h) * w, 0.0);
  int a = kernel.side / 2;
  for (int i = 0; i < kernel.side; ++i) {
    int ii = ((i - a) % h + h) % h;
    for (int j = 0; j < kernel.side; ++j) {
      int jj = ((j - a) % w + w) % w;
      psf[static_cast<size_t>(ii) * w + jj] +=
          kernel.taps[static_cast<size_t>(i) * kernel.side + j];
    }
  }
  detail::fft2d(psf, h, w);
  SpectralOperator op(h, w);
  op.transfer = std::move(psf);
  return op;
}

enum class QMode { gaussian, rayleigh };

/// Preconditioner transfer. Gaussian: |K|^2 + eps * L. Rayleigh:
/// beta * |K|^2 + eps * L, with L the periodic Laplacian transfer.
inline SpectralOperator build_Q(QMode mode, const SpectralOperator& K,
                                double eps, double beta = 1.0) {
  if (eps <= 0.0) throw std::invalid_argument("build_Q: eps must be positive");
  if (beta <= 0.0) throw std::invalid_argument("build_Q: beta must be positive");
  double b = (mode == QMode::gaussian) ? 1.0 : beta;
  SpectralOperator L = laplacian_operator(K.height, K.width);
  SpectralOperator Q(K.height, K.width);
  for (size_t i = 0; i < Q.transfer.size(); ++i) {
    Q.transfer[i] = b * std::norm(K.transfer[i]) + eps * L.transfer[i].real();
  }
  if (Q.min_real_transfer() <= 1e-14)
    throw std::runtime_error("build_Q: singular Q (zero-frequency transfer vanishes)");
  return Q;
}

/// Solves Q y = x spectrally.
inline Image q_inverse_apply(const SpectralOperator& Q, const Image& x) {
  if (Q.min_real_transfer() <= 1e-14)
    throw std::runtime_error("q_inverse_apply: singular Q");
  std::vector<std::complex<double>> buf(x.pixels.begin(), x.pixels.end());
  detail::fft2d(buf, Q.height, Q.width);
  for (size_t i = 0; i < buf.size(); ++i) buf[i] /= Q.transfer[i];
  detail::ifft2d(buf, Q.height, Q.width);
  Image out(Q.height, Q.width);
  for (size_t i = 0; i < buf.size(); ++i) out.pixels[i] = buf[i].real();
  return out;
}

struct EigenEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power iteration for the largest eigenvalue of B Q^{-1} B^T acting on
/// dual fields. Pass the identity transfer for the plain B B^T bound.
inline EigenEstimate lambda_max_BQinvBT(const SpectralOperator& Q,
                                        int max_iter = 10000,
                                        double tol = 1e-9) {
  Rng rng(0x5eed);
  DualField p(Q.height, Q.width);
  for (size_t i = 0; i < p.size(); ++i) {
    p.channel_x[i] = rng.uniform() - 0.5;
    p.channel_y[i] = rng.uniform() - 0.5;
  }
  double lambda = 0.0;
  EigenEstimate est;
  for (int k = 0; k < max_iter; ++k) {
    DualField q = grad(q_inverse_apply(Q, grad_adjoint(p)));
    double pn = norm2(p);
    double rq = dot(p, q) / (pn * pn);
    double qn = norm2(q);
    if (qn == 0.0) {  // p fell in the null space; reseed
      for (size_t i = 0; i < p.size(); ++i) p.channel_x[i] = rng.uniform() - 0.5;
      continue;
    }
    for (size_t i = 0; i < p.size(); ++i) {
      p.channel_x[i] = q.channel_x[i] / qn;
      p.channel_y[i] = q.channel_y[i] / qn;
    }
    est.iterations = k + 1;
    if (k > 0 && std::abs(rq - lambda) < tol * std::max(1.0, std::abs(rq))) {
      est.value = rq;
      est.converged = true;
      return est;
    }
    lambda = rq;
  }
  est.value = lambda;
  est.converged = false;
  return est;
}

inline EigenEstimate lambda_max_BBT(int h, int w) {
  return lambda_max_BQinvBT(SpectralOperator::identity(h, w));
}

/// Closed form for the same eigenvalue: B and Q share the Fourier basis, so
/// the nonzero spectrum of B Q^{-1} B^T is { L(omega) / Q(omega) } with L the
/// Laplacian transfer. O(N), exact; the power iteration above is the
/// basis-free cross-check.
inline double lambda_max_BQinvBT_exact(const SpectralOperator& Q) {
  SpectralOperator L = laplacian_operator(Q.height, Q.width);
  double m = 0.0;
  for (size_t i = 0; i < Q.transfer.size(); ++i) {
    m = std::max(m, L.transfer[i].real() / Q.transfer[i].real());
  }
  return m;
}

}  // namespace fppo

#endif  // FPPO_OPERATORS_HPP_
