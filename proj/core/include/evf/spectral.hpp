#pragma once

#include <vector>

#include "evf/accumulate.hpp"
#include "evf/event.hpp"

namespace evf {

/// Spectral feature extraction settings.
struct SpectralConfig {
  int block = 16;            // central low-frequency crop, feature dim = block^2
  bool log_compress = true;  // log(1 + magnitude)
};

/// Frequency-domain feature of an accumulated frame: collapse to a signed
/// grid, zero-pad to powers of two, FFT, center the spectrum, crop the
/// central block x block magnitudes, log-compress, L2-normalize.
/// An all-zero frame yields the all-zero vector.
std::vector<double> spectral_features(const AccumFrame& frame, const SpectralConfig& cfg = {});

/// Rasterizes a normalized event window onto a fixed grid so windowed
/// classifier inputs can reuse the accumulated-frame feature path.
/// x = round(xn*(w-1)), y = round(yn*(h-1)).
AccumFrame rasterize_window(const EventWindow& window, int width, int height,
                            AccumMode mode = AccumMode::Signed);

}  // namespace evf
