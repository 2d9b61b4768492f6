#include "cglkit/correlation.hpp"

#include <fftw3.h>

#include <mutex>

#include "cglkit/error.hpp"

namespace cglkit {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct CircularCorrelator::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

CircularCorrelator::CircularCorrelator(std::size_t p) : p_(p), plans_(std::make_unique<Plans>()) {
  if (p == 0) throw Error(ErrorCode::InvalidArgument, "correlator needs p >= 1");
  const int n = static_cast<int>(p);
  double* rbuf = fftw_alloc_real(p);
  fftw_complex* cbuf = fftw_alloc_complex(p / 2 + 1);
  {
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->fwd = fftw_plan_dft_r2c_1d(n, rbuf, cbuf, flags);
    plans_->inv = fftw_plan_dft_c2r_1d(n, cbuf, rbuf, flags | FFTW_DESTROY_INPUT);
  }
  fftw_free(rbuf);
  fftw_free(cbuf);
  if (!plans_->fwd || !plans_->inv) throw Error(ErrorCode::InvalidArgument, "FFTW planning failed");
}

CircularCorrelator::~CircularCorrelator() {
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->inv) fftw_destroy_plan(plans_->inv);
}

void CircularCorrelator::forward(const double* x, std::complex<double>* out) const {
  // The r2c new-array interface does not write to its input.
  fftw_execute_dft_r2c(plans_->fwd, const_cast<double*>(x), reinterpret_cast<fftw_complex*>(out));
}

void CircularCorrelator::accumulate(const std::complex<double>* fa, const std::complex<double>* fb,
                                    std::complex<double>* scratch) const {
  const std::size_t m = spectrum_size();
  for (std::size_t k = 0; k < m; ++k) scratch[k] += fa[k] * std::conj(fb[k]);
}

void CircularCorrelator::finish(std::complex<double>* scratch, double* corr) const {
  fftw_execute_dft_c2r(plans_->inv, reinterpret_cast<fftw_complex*>(scratch), corr);
  const double inv_p = 1.0 / static_cast<double>(p_);
  for (std::size_t s = 0; s < p_; ++s) corr[s] *= inv_p;
}

void CircularCorrelator::correlate(const std::complex<double>* fa, const std::complex<double>* fb,
                                   double* corr, std::complex<double>* scratch) const {
  const std::size_t m = spectrum_size();
  for (std::size_t k = 0; k < m; ++k) scratch[k] = fa[k] * std::conj(fb[k]);
  finish(scratch, corr);
}

}  // namespace cglkit
