#ifndef FPPO_FFT_HPP_
#define FPPO_FFT_HPP_

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace fppo {
namespace detail {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// One c2c plan pair per (height, width), with owned aligned buffers.
// Cached per thread so concurrent solver runs never share scratch space.
class FftPlan {
 public:
  FftPlan(int h, int w) : h_(h), w_(w) {
    size_t n = static_cast<size_t>(h) * w;
    buf_ = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(h, w, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_2d(h, w, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  // In-place transform of `data` (length h*w). Inverse is unnormalized.
  void execute(std::vector<std::complex<double>>& data, bool forward) {
    size_t n = static_cast<size_t>(h_) * w_;
    for (size_t i = 0; i < n; ++i) {
      buf_[i][0] = data[i].real();
      buf_[i][1] = data[i].imag();
    }
    fftw_execute(forward ? fwd_ : inv_);
    for (size_t i = 0; i < n; ++i) data[i] = {buf_[i][0], buf_[i][1]};
  }

 private:
  int h_, w_;
  fftw_complex* buf_;
  fftw_plan fwd_, inv_;
};

inline FftPlan& plan_for(int h, int w) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[{h, w}];
  if (!slot) slot = std::make_unique<FftPlan>(h, w);
  return *slot;
}

inline void fft2d(std::vector<std::complex<double>>& data, int h, int w) {
  plan_for(h, w).execute(data, true);
}

// Normalized inverse: ifft(fft(x)) == x.
inline void ifft2d(std::vector<std::complex<double>>& data, int h, int w) {
  plan_for(h, w).execute(data, false);
  double scale = 1.0 / (static_cast<double>(h) * w);
  for (auto& z : data) z *= scale;
}

}  // namespace detail
}  // namespace fppo

#endif  // FPPO_FFT_HPP_
