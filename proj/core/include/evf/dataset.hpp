#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evf/emulator.hpp"
#include "evf/event.hpp"
#include "evf/metrics.hpp"
#include "evf/synth.hpp"

namespace evf {

/// Product of one synth + emulate run.
struct RegimeRecording {
  FrameSequence frames;
  std::vector<FlowRegime> frame_labels;
  std::vector<Event> events;
};

RegimeRecording make_regime_recording(const SynthParams& params, const EmulatorConfig& emu);

struct LabeledWindows {
  std::vector<EventWindow> windows;
  std::vector<FlowRegime> labels;
};

/// Normalize -> rate limit -> fixed-count windows, labeling each window with
/// the majority label of its events (ties to the lowest class code).
LabeledWindows windows_from_labeled_events(std::span<const Event> events,
                                           std::span<const FlowRegime> event_labels,
                                           const Roi& roi, int sensor_width, int sensor_height,
                                           std::uint32_t max_events_per_us, std::size_t seq_len);

/// Settings for the seeded synthetic dataset used by training and evaluation.
struct DatasetSpec {
  std::vector<FlowRegime> regimes{kAllRegimes.begin(), kAllRegimes.end()};
  int windows_per_regime = 300;
  int seq_len = 2500;
  int width = 64;
  int height = 64;
  double fps = 2000.0;
  double flow_speed = 1.5;
  double feature_density = 0.15;
  EmulatorConfig emulator;
  std::uint32_t max_events_per_us = 0;
  std::uint64_t seed = 0;
};

/// Builds a balanced labeled window set: per regime, probes the event rate,
/// generates enough frames, and truncates to exactly windows_per_regime.
LabeledWindows build_synthetic_dataset(const DatasetSpec& spec);

/// Per-regime normalized stamped streams (for length sweeps). Each recording
/// holds at least target_events admitted events.
std::vector<StampedRecording> build_synthetic_recordings(const DatasetSpec& spec,
                                                         std::uint64_t target_events_per_regime);

}  // namespace evf
