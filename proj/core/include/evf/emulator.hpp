#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evf/event.hpp"
#include "evf/frames.hpp"

namespace evf {

/// Contrast-threshold event emulation settings.
struct EmulatorConfig {
  double contrast = 0.2;        // log-intensity units per event
  double linlog_cutoff = 20.0;  // intensity below which the log map is linearized
  int max_events_per_pixel_per_frame = 16;
};

/// Intensity -> log-intensity map: ln(I) for I >= cutoff, linear through the
/// origin below it (value-continuous at the cutoff).
double linlog(double intensity, double cutoff);

/// Converts a frame sequence to an event stream by thresholding per-pixel
/// log-intensity changes against a per-pixel reference level. The reference
/// advances by k*C*sign(d), carrying sub-threshold residuals across frames.
/// Output is globally timestamp-sorted.
std::vector<Event> emulate_events(const FrameSequence& frames, const EmulatorConfig& cfg);

/// Maps each event to the label of the frame interval containing it:
/// frame floor((t - t0)/dt). Throws OutOfRange for events outside
/// [t0, t0 + frame_count*dt).
std::vector<FlowRegime> label_events(std::span<const Event> events, const FrameSequence& frames,
                                     std::span<const FlowRegime> frame_labels);

}  // namespace evf
