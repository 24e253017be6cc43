#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evf/flow_regime.hpp"

namespace evf {

/// Ordered grayscale frame sequence with a fixed inter-frame interval.
struct FrameSequence {
  int width = 0;
  int height = 0;
  std::uint64_t dt_us = 0;  // inter-frame interval
  std::uint64_t t0_us = 0;  // timestamp of frame 0
  std::vector<std::vector<std::uint8_t>> frames;  // each height*width, row-major

  std::size_t frame_count() const { return frames.size(); }
  std::uint8_t at(std::size_t frame, int y, int x) const {
    return frames[frame][static_cast<std::size_t>(y) * width + x];
  }
};

/// Validates shape invariants; throws ShapeMismatch / InvalidParams.
void validate_frames(const FrameSequence& seq);

// PGM (P5) directory layout: frame_000000.pgm ... plus meta.txt with
// dt_us, t0_us and optional per-frame labels.

void write_pgm(const std::string& path, const std::uint8_t* data, int width, int height);
std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height);

void write_frame_dir(const std::string& dir, const FrameSequence& seq,
                     const std::vector<FlowRegime>& labels = {});

struct FrameDirContents {
  FrameSequence seq;
  std::vector<FlowRegime> labels;  // empty when the sidecar has none
};

FrameDirContents read_frame_dir(const std::string& dir);

}  // namespace evf
