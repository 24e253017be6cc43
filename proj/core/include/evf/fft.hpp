#pragma once

#include <complex>
#include <span>
#include <vector>

namespace evf {

using Complex = std::complex<double>;

/// In-place radix-2 decimation-in-time FFT. n must be a power of two.
/// Forward transform is unnormalized; the inverse divides by n.
void fft_inplace(std::span<Complex> data, bool inverse);

/// Row-major complex grid plus dims; result of fft2.
struct Spectrum {
  int rows = 0;
  int cols = 0;
  std::vector<Complex> data;

  Complex& at(int r, int c) { return data[std::size_t(r) * cols + c]; }
  const Complex& at(int r, int c) const { return data[std::size_t(r) * cols + c]; }
};

/// Forward unnormalized 2-D DFT (rows then columns). Throws NonPowerOfTwo.
Spectrum fft2(std::span<const double> grid, int rows, int cols);
Spectrum fft2(const Spectrum& grid, bool inverse);

/// Inverse with 1/(rows*cols) normalization.
Spectrum ifft2(const Spectrum& spec);

bool is_power_of_two(unsigned v);
unsigned next_power_of_two(unsigned v);

}  // namespace evf
