#include "evf/spectral.hpp"

#include <cmath>

#include "evf/errors.hpp"
#include "evf/fft.hpp"

namespace evf {

std::vector<double> spectral_features(const AccumFrame& frame, const SpectralConfig& cfg) {
  if (frame.width <= 0 || frame.height <= 0) throw InvalidParams("degenerate frame");
  if (cfg.block <= 0) throw InvalidParams("block must be positive");

  const int rows = int(next_power_of_two(unsigned(std::max(frame.height, cfg.block))));
  const int cols = int(next_power_of_two(unsigned(std::max(frame.width, cfg.block))));

  std::vector<double> grid(std::size_t(rows) * cols, 0.0);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      grid[std::size_t(y) * cols + x] = double(frame.signed_at(y, x));

  Spectrum spec = fft2(grid, rows, cols);

  // centered crop: spectrum row r of the shifted layout is source row
  // (r + rows/2) mod rows, so DC lands in the middle of the block
  const int r0 = rows / 2 - cfg.block / 2;
  const int c0 = cols / 2 - cfg.block / 2;
  std::vector<double> feat(std::size_t(cfg.block) * cfg.block);
  for (int r = 0; r < cfg.block; ++r) {
    const int src_r = (r0 + r + rows / 2) % rows;
    for (int c = 0; c < cfg.block; ++c) {
      const int src_c = (c0 + c + cols / 2) % cols;
      double m = std::abs(spec.at(src_r, src_c));
      feat[std::size_t(r) * cfg.block + c] = cfg.log_compress ? std::log1p(m) : m;
    }
  }

  double norm_sq = 0.0;
  for (double v : feat) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : feat) v *= inv;
  }
  return feat;
}

AccumFrame rasterize_window(const EventWindow& window, int width, int height, AccumMode mode) {
  if (width <= 0 || height <= 0) throw InvalidParams("raster dims must be positive");
  AccumFrame f;
  f.width = width;
  f.height = height;
  f.channels = mode == AccumMode::Signed ? 1 : 2;
  f.grid.assign(std::size_t(f.channels) * width * height, 0);
  for (const NormalizedEvent& ev : window.events) {
    const int x = int(std::lround(ev.xn * (width - 1)));
    const int y = int(std::lround(ev.yn * (height - 1)));
    const std::size_t idx = std::size_t(y) * width + x;
    if (mode == AccumMode::Signed)
      f.grid[idx] += ev.p;
    else
      ++f.grid[(ev.p > 0 ? 0 : 1) * std::size_t(width) * height + idx];
  }
  f.event_count = window.events.size();
  f.delta_t_us = window.t_end - window.t_start;
  f.t_start_us = window.t_start;
  return f;
}

}  // namespace evf
