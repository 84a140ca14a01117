#include "doctest.h"

#include <cmath>

#include "fppo/fidelity.hpp"
#include "fppo/rng.hpp"

using namespace fppo;

namespace {

Image random_image(int h, int w, Rng& rng, double lo, double hi) {
  Image u(h, w);
  for (auto& p : u.pixels) p = lo + (hi - lo) * rng.uniform();
  return u;
}

// Naive spatial-domain evaluation, independent of the spectral path.
double naive_gaussian_value(const GaussianFidelity& F, const Image& u) {
  Image r = F.K.apply(u);
  double s = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    double d = r.pixels[i] - F.b.pixels[i];
    s += d * d;
  }
  return 0.5 * s;
}

double naive_rayleigh_value(const RayleighFidelity& F, const Image& u) {
  Image s = F.K.apply(u);
  double v = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    double si = std::max(s.pixels[i], F.floor);
    v += (F.b.pixels[i] - s.pixels[i]) * (F.b.pixels[i] - s.pixels[i]) / si;
  }
  return v;
}

// Central finite difference of a fidelity value in coordinate k.
template <typename ValueFn>
double fd_gradient(ValueFn value, Image u, size_t k, double h = 1e-3) {
  double orig = u.pixels[k];
  u.pixels[k] = orig + h;
  double fp = value(u);
  u.pixels[k] = orig - h;
  double fm = value(u);
  return (fp - fm) / (2.0 * h);
}

}  // namespace

TEST_CASE("gaussian value: zero at u = b for delta kernel, N/2 at offset 1") {
  Rng rng(1);
  SpectralOperator K = blur_operator(BlurKernel::delta_kernel(), 8, 8);
  Image b = random_image(8, 8, rng, 0.0, 255.0);
  GaussianFidelity F{K, b};
  CHECK(gaussian_value(F, b) == doctest::Approx(0.0).epsilon(1e-12));

  Image u = b;
  for (auto& p : u.pixels) p += 1.0;
  CHECK(gaussian_value(F, u) == doctest::Approx(64.0 / 2.0).epsilon(1e-10));
}

TEST_CASE("gaussian value matches naive summation") {
  Rng rng(2);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 12, 12);
  GaussianFidelity F{K, random_image(12, 12, rng, 0.0, 255.0)};
  Image u = random_image(12, 12, rng, 0.0, 255.0);
  CHECK(gaussian_value(F, u) ==
        doctest::Approx(naive_gaussian_value(F, u)).epsilon(1e-10));
}

TEST_CASE("gaussian gradient: zero at u = b for delta kernel") {
  Rng rng(3);
  SpectralOperator K = blur_operator(BlurKernel::delta_kernel(), 6, 6);
  Image b = random_image(6, 6, rng, 0.0, 255.0);
  GaussianFidelity F{K, b};
  CHECK(norm2(gaussian_gradient(F, b)) < 1e-10);
}

TEST_CASE("gaussian gradient matches central finite differences") {
  Rng rng(4);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 10, 10);
  GaussianFidelity F{K, random_image(10, 10, rng, 0.0, 255.0)};
  Image u = random_image(10, 10, rng, 0.0, 255.0);
  Image g = gaussian_gradient(F, u);
  for (int trial = 0; trial < 30; ++trial) {
    size_t k = rng.raw() % u.size();
    double fd = fd_gradient([&](const Image& x) { return gaussian_value(F, x); },
                            u, k);
    CHECK(g.pixels[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gaussian gradient is affine: g(u1+u2) = g(u1) + g(u2) + Kt b") {
  Rng rng(5);
  SpectralOperator K = blur_operator(BlurKernel::box(4), 8, 8);
  GaussianFidelity F{K, random_image(8, 8, rng, 0.0, 255.0)};
  Image u1 = random_image(8, 8, rng, 0.0, 100.0);
  Image u2 = random_image(8, 8, rng, 0.0, 100.0);
  Image sum = u1;
  axpy(1.0, u2, sum);
  Image lhs = gaussian_gradient(F, sum);
  Image rhs = gaussian_gradient(F, u1);
  axpy(1.0, gaussian_gradient(F, u2), rhs);
  axpy(1.0, K.apply_adjoint(F.b), rhs);
  double rel = norm2(subtract(lhs, rhs)) / std::max(1.0, norm2(lhs));
  CHECK(rel < 1e-10);
}

TEST_CASE("rayleigh value: trivial identities with delta kernel") {
  Rng rng(6);
  SpectralOperator K = blur_operator(BlurKernel::delta_kernel(), 8, 8);
  Image b = random_image(8, 8, rng, 1.0, 255.0);
  RayleighFidelity F{K, b};
  CHECK(rayleigh_value(F, b) == doctest::Approx(0.0).epsilon(1e-12));

  Image b4(8, 8, 4.0), u1(8, 8, 1.0);
  RayleighFidelity F4{K, b4};
  CHECK(rayleigh_value(F4, u1) == doctest::Approx(9.0 * 64.0).epsilon(1e-12));
}

TEST_CASE("rayleigh value matches naive summation") {
  Rng rng(7);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 10, 10);
  RayleighFidelity F{K, random_image(10, 10, rng, 10.0, 255.0)};
  Image u = random_image(10, 10, rng, 10.0, 255.0);
  CHECK(rayleigh_value(F, u) ==
        doctest::Approx(naive_rayleigh_value(F, u)).epsilon(1e-10));
}

TEST_CASE("rayleigh gradient: closed-form spot checks with delta kernel") {
  Rng rng(8);
  SpectralOperator K = blur_operator(BlurKernel::delta_kernel(), 6, 6);
  Image b = random_image(6, 6, rng, 5.0, 200.0);
  RayleighFidelity F{K, b};
  CHECK(norm2(rayleigh_gradient(F, b)) < 1e-10);

  // u = 2b: per-pixel derivative 1 - b^2/(2b)^2 = 3/4.
  Image u2 = b;
  for (auto& p : u2.pixels) p *= 2.0;
  Image g = rayleigh_gradient(F, u2);
  for (double p : g.pixels) CHECK(p == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("rayleigh gradient matches central finite differences") {
  Rng rng(9);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 10, 10);
  RayleighFidelity F{K, random_image(10, 10, rng, 20.0, 255.0)};
  Image u = random_image(10, 10, rng, 20.0, 255.0);
  Image g = rayleigh_gradient(F, u);
  for (int trial = 0; trial < 30; ++trial) {
    size_t k = rng.raw() % u.size();
    double fd = fd_gradient([&](const Image& x) { return rayleigh_value(F, x); },
                            u, k);
    CHECK(g.pixels[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("rayleigh value unaffected by the clamp when Ku stays above it") {
  Rng rng(10);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 8, 8);
  RayleighFidelity F{K, random_image(8, 8, rng, 50.0, 255.0)};
  RayleighFidelity F_low = F;
  F_low.floor = 1e-9;
  Image u = random_image(8, 8, rng, 50.0, 255.0);
  CHECK(rayleigh_value(F, u) == doctest::Approx(rayleigh_value(F_low, u)));
}

TEST_CASE("estimate_beta: gaussian cases") {
  Rng rng(11);
  Image b = random_image(8, 8, rng, 0.0, 255.0);
  SpectralOperator Kd = blur_operator(BlurKernel::delta_kernel(), 8, 8);
  CHECK(estimate_beta(GaussianFidelity{Kd, b}) == doctest::Approx(1.0));

  SpectralOperator Kb = blur_operator(BlurKernel::box(4), 8, 8);
  double lam = Kb.max_abs2_transfer();
  CHECK(lam <= 1.0 + 1e-12);
  CHECK(estimate_beta(GaussianFidelity{Kb, b}) == doctest::Approx(1.0 / lam));
}

TEST_CASE("estimate_beta: rayleigh lower bound from box extremes") {
  Rng rng(12);
  Image b = random_image(8, 8, rng, 1.0, 255.0);
  SpectralOperator K = blur_operator(BlurKernel::box(4), 8, 8);
  double beta = estimate_beta(RayleighFidelity{K, b}, ValueBox{1.0, 255.0});
  double lam = K.max_abs2_transfer();
  CHECK(beta >= 1.0 / (2.0 * lam * 255.0 * 255.0) - 1e-15);
}

TEST_CASE("gaussian co-coercivity with the estimated beta") {
  Rng rng(13);
  SpectralOperator K = blur_operator(BlurKernel::box(3), 10, 10);
  GaussianFidelity F{K, random_image(10, 10, rng, 0.0, 255.0)};
  double beta = estimate_beta(Fidelity{F});
  for (int trial = 0; trial < 20; ++trial) {
    Image v = random_image(10, 10, rng, 0.0, 255.0);
    Image w = random_image(10, 10, rng, 0.0, 255.0);
    Image dg = subtract(gaussian_gradient(F, v), gaussian_gradient(F, w));
    double lhs = dot(dg, subtract(v, w));
    CHECK(lhs >= beta * dot(dg, dg) - 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("shape mismatch is rejected") {
  SpectralOperator K = blur_operator(BlurKernel::delta_kernel(), 4, 4);
  GaussianFidelity F{K, Image(4, 4, 1.0)};
  CHECK_THROWS_AS(gaussian_value(F, Image(5, 5, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_gradient(F, Image(3, 4, 1.0)), std::invalid_argument);
}
