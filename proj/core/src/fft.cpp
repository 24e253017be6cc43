#include "evf/fft.hpp"

#include <cmath>

#include "evf/errors.hpp"

namespace evf {

bool is_power_of_two(unsigned v) { return v != 0 && (v & (v - 1)) == 0; }

unsigned next_power_of_two(unsigned v) {
  unsigned p = 1;
  while (p < v) p <<= 1;
  return p;
}

void fft_inplace(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(static_cast<unsigned>(n)))
    throw NonPowerOfTwo("fft length " + std::to_string(n) + " is not a power of two");
  if (n == 1) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / double(len);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex u = data[i + j];
        Complex v = w * data[i + j + len / 2];
        data[i + j] = u + v;
        data[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse)
    for (Complex& v : data) v /= double(n);
}

namespace {

Spectrum fft2_core(Spectrum grid, bool inverse) {
  const int rows = grid.rows, cols = grid.cols;
  if (!is_power_of_two(unsigned(rows)) || !is_power_of_two(unsigned(cols)))
    throw NonPowerOfTwo("fft2 dims " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " are not powers of two");

  // rows (note fft_inplace applies 1/cols per row when inverse; combined with
  // the column pass this yields the full 1/(rows*cols) normalization)
  for (int r = 0; r < rows; ++r)
    fft_inplace(std::span<Complex>(grid.data.data() + std::size_t(r) * cols, cols), inverse);

  // columns via a scratch buffer
  std::vector<Complex> col(rows);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) col[r] = grid.at(r, c);
    fft_inplace(col, inverse);
    for (int r = 0; r < rows; ++r) grid.at(r, c) = col[r];
  }
  return grid;
}

}  // namespace

Spectrum fft2(std::span<const double> grid, int rows, int cols) {
  if (rows <= 0 || cols <= 0 || grid.size() != std::size_t(rows) * cols)
    throw InvalidParams("fft2 grid size does not match dims");
  Spectrum s;
  s.rows = rows;
  s.cols = cols;
  s.data.assign(grid.begin(), grid.end());
  return fft2_core(std::move(s), false);
}

Spectrum fft2(const Spectrum& grid, bool inverse) { return fft2_core(grid, inverse); }

Spectrum ifft2(const Spectrum& spec) { return fft2_core(spec, true); }

}  // namespace evf
