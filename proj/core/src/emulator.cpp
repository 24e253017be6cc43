#include "evf/emulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "evf/errors.hpp"

namespace evf {

double linlog(double intensity, double cutoff) {
  if (intensity >= cutoff) return std::log(intensity);
  return intensity * (std::log(cutoff) / cutoff);
}

std::vector<Event> emulate_events(const FrameSequence& frames, const EmulatorConfig& cfg) {
  validate_frames(frames);
  if (frames.frame_count() < 2) throw EmptySequence("emulation needs at least 2 frames");
  if (cfg.contrast <= 0.0 || cfg.linlog_cutoff <= 0.0 || cfg.max_events_per_pixel_per_frame <= 0)
    throw InvalidParams("emulator config values must be positive");

  std::array<double, 256> lut;
  for (int i = 0; i < 256; ++i) lut[i] = linlog(double(i), cfg.linlog_cutoff);

  const int w = frames.width, h = frames.height;
  const std::size_t npx = static_cast<std::size_t>(w) * h;
  const double c = cfg.contrast;
  const int cap = cfg.max_events_per_pixel_per_frame;

  std::vector<double> ref(npx);
  for (std::size_t i = 0; i < npx; ++i) ref[i] = lut[frames.frames[0][i]];

  std::vector<Event> events;
  for (std::size_t k = 1; k < frames.frame_count(); ++k) {
    const std::uint64_t interval_start = frames.t0_us + (k - 1) * frames.dt_us;
    const std::uint8_t* img = frames.frames[k].data();
    for (int y = 0; y < h; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        const std::size_t i = row + x;
        const double d = lut[img[i]] - ref[i];
        const double mag = std::abs(d);
        if (mag < c) continue;
        int n = std::min(int(mag / c), cap);
        const std::int8_t pol = d > 0 ? std::int8_t(1) : std::int8_t(-1);
        for (int j = 0; j < n; ++j) {
          std::uint64_t t = interval_start + (std::uint64_t(j) + 1) * frames.dt_us / (std::uint64_t(n) + 1);
          events.push_back(Event{std::uint16_t(x), std::uint16_t(y), t, pol});
        }
        ref[i] += n * c * (pol > 0 ? 1.0 : -1.0);
      }
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return events;
}

std::vector<FlowRegime> label_events(std::span<const Event> events, const FrameSequence& frames,
                                     std::span<const FlowRegime> frame_labels) {
  if (frame_labels.size() != frames.frame_count())
    throw InvalidParams("frame label count differs from frame count");
  const std::uint64_t t0 = frames.t0_us;
  const std::uint64_t span_us = frames.frame_count() * frames.dt_us;
  std::vector<FlowRegime> out;
  out.reserve(events.size());
  for (const Event& e : events) {
    if (e.t < t0 || e.t >= t0 + span_us) throw OutOfRange(e.t);
    out.push_back(frame_labels[(e.t - t0) / frames.dt_us]);
  }
  return out;
}

}  // namespace evf
