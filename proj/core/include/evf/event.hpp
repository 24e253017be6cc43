#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evf/errors.hpp"
#include "evf/flow_regime.hpp"

namespace evf {

/// One sensor event: pixel location, microsecond timestamp, polarity.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint64_t t = 0;  // microseconds
  std::int8_t p = 1;    // +1 or -1

  friend bool operator==(const Event&, const Event&) = default;
};

/// Rectangular region of interest inside the sensor frame.
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

inline void validate_roi(const Roi& roi, int sensor_width, int sensor_height) {
  if (roi.width <= 0 || roi.height <= 0)
    throw InvalidRoi("roi extent must be positive");
  if (roi.x0 < 0 || roi.y0 < 0 || roi.x0 + roi.width > sensor_width ||
      roi.y0 + roi.height > sensor_height)
    throw InvalidRoi("roi exceeds sensor bounds");
}

/// Event after ROI normalization; timestamps are dropped from classifier input.
struct NormalizedEvent {
  double xn = 0.0;  // in [0, 1]
  double yn = 0.0;  // in [0, 1]
  std::int8_t p = 1;

  friend bool operator==(const NormalizedEvent&, const NormalizedEvent&) = default;
};

/// Normalized event still carrying its source timestamp; internal plumbing for
/// rate limiting and window bookkeeping between normalization and windowing.
struct StampedEvent {
  NormalizedEvent ev;
  std::uint64_t t = 0;
};

/// Fixed-length ordered sequence of normalized events; one classifier input.
struct EventWindow {
  std::vector<NormalizedEvent> events;
  std::optional<FlowRegime> label;
  std::uint64_t t_start = 0;  // source timestamps, metadata only
  std::uint64_t t_end = 0;
};

}  // namespace evf
