#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evf/event.hpp"

namespace evf {

enum class AccumMode { Signed, Dual };

/// 2-D frame accumulated from a fixed quantity of events.
/// Signed mode: one channel, polarity added at (y, x).
/// Dual mode: channel 0 counts +1 events, channel 1 counts -1 events.
struct AccumFrame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::int32_t> grid;  // channels * height * width, channel-major
  std::uint64_t event_count = 0;
  std::uint64_t delta_t_us = 0;  // t_last - t_first of the consumed slice
  std::uint64_t t_start_us = 0;

  std::int32_t at(int channel, int y, int x) const {
    return grid[(std::size_t(channel) * height + y) * width + x];
  }
  /// Signed view: channel 0 for signed frames, positive - negative for dual.
  std::int32_t signed_at(int y, int x) const {
    return channels == 1 ? at(0, y, x) : at(0, y, x) - at(1, y, x);
  }
};

/// Streaming accumulator consuming exactly count_threshold events per frame.
class Accumulator {
 public:
  Accumulator(std::uint64_t count_threshold, AccumMode mode, int width, int height);

  /// Throws OutOfBounds when the event lies outside the configured dims.
  std::optional<AccumFrame> push(const Event& e);

  std::uint64_t pending() const { return pending_; }

 private:
  std::uint64_t threshold_;
  AccumMode mode_;
  int width_, height_;
  AccumFrame current_;
  std::uint64_t pending_ = 0;
  std::uint64_t t_first_ = 0, t_last_ = 0;

  void reset_frame();
};

std::vector<AccumFrame> accumulate(std::span<const Event> events, std::uint64_t count_threshold,
                                   AccumMode mode, int width, int height);

/// Diagnostic 8-bit rendering: 0 -> 128, clip(128 + 32*count); dual frames
/// render positive - negative the same way.
std::vector<std::uint8_t> render_accum(const AccumFrame& frame);

// "ACF1" serialization: magic 41 43 46 31, u16 width, u16 height, u16 channels,
// u32 event_count, u32 delta_t_us (truncated), then the i32 grid, all LE.
std::vector<std::uint8_t> encode_acf(const AccumFrame& frame);
AccumFrame decode_acf(std::span<const std::uint8_t> bytes);

void write_acf_file(const std::string& path, const AccumFrame& frame);
AccumFrame read_acf_file(const std::string& path);

}  // namespace evf
