#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cglkit {

// Circular cross-correlation through FFTW real transforms.
//
// corr[s] = sum_j a[j] * b[(j - s) mod p], i.e. the inner product of a with b
// rotated by s. Plans are built with FFTW_ESTIMATE so the arithmetic does not
// depend on timing; plan creation is serialised, execution is thread-safe.
class CircularCorrelator {
 public:
  explicit CircularCorrelator(std::size_t p);
  ~CircularCorrelator();
  CircularCorrelator(const CircularCorrelator&) = delete;
  CircularCorrelator& operator=(const CircularCorrelator&) = delete;

  std::size_t p() const { return p_; }
  std::size_t spectrum_size() const { return p_ / 2 + 1; }

  /// Half spectrum of x (length p) into `out` (length p/2 + 1).
  void forward(const double* x, std::complex<double>* out) const;

  /// corr (length p) from two half spectra. `scratch` must hold
  /// spectrum_size() entries.
  void correlate(const std::complex<double>* fa, const std::complex<double>* fb, double* corr,
                 std::complex<double>* scratch) const;

  /// Accumulating variant for multi-ring images: scratch += fa * conj(fb).
  void accumulate(const std::complex<double>* fa, const std::complex<double>* fb,
                  std::complex<double>* scratch) const;
  /// corr = inverse(scratch) / p. Destroys scratch.
  void finish(std::complex<double>* scratch, double* corr) const;

 private:
  struct Plans;
  std::size_t p_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace cglkit
