#pragma once

#include <cstdint>
#include <vector>

#include "evf/flow_regime.hpp"
#include "evf/frames.hpp"

namespace evf {

/// Parameters of the seeded synthetic flow-regime video generator.
struct SynthParams {
  FlowRegime regime = FlowRegime::B;
  int width = 64;
  int height = 64;
  int frame_count = 256;
  double fps = 2000.0;
  double flow_speed = 1.5;        // pixels per frame; 0 freezes the scene
  double feature_density = 0.15;  // in (0, 1]
  std::uint64_t seed = 0;
};

struct SynthResult {
  FrameSequence frames;
  std::vector<FlowRegime> labels;  // one per frame
};

/// Renders a deterministic grayscale sequence for the requested regime.
/// Liquid is bright, vapor dark; edges are soft so sub-pixel advection
/// produces gradual log-intensity changes.
SynthResult synth_regime(const SynthParams& params);

}  // namespace evf
