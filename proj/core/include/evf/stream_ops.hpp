#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evf/event.hpp"

namespace evf {

// ---------------------------------------------------------------------------
// ROI normalization. Events outside the ROI are dropped; survivors map to
// xn = (x - x0)/(width - 1), yn = (y - y0)/(height - 1); a 1-pixel extent
// maps to 0.
// ---------------------------------------------------------------------------

/// Normalizes a single in-ROI event; nullopt when the event falls outside.
std::optional<NormalizedEvent> normalize_event(const Event& e, const Roi& roi);

std::vector<NormalizedEvent> normalize_roi(std::span<const Event> events, const Roi& roi,
                                           int sensor_width, int sensor_height);

/// Same mapping, keeping timestamps for downstream windowing.
std::vector<StampedEvent> normalize_roi_stamped(std::span<const Event> events, const Roi& roi,
                                                int sensor_width, int sensor_height);

// ---------------------------------------------------------------------------
// Rate limiting: within each 1 us bucket at most max_per_us events pass;
// the earliest events in stream order are kept.
// ---------------------------------------------------------------------------

/// Streaming admission filter, one instance per ordered stream.
class RateLimiter {
 public:
  explicit RateLimiter(std::uint32_t max_per_us) : max_per_us_(max_per_us) {}

  bool admit(std::uint64_t t_us) {
    if (!have_bucket_ || t_us != bucket_) {
      bucket_ = t_us;
      have_bucket_ = true;
      in_bucket_ = 0;
    }
    if (in_bucket_ < max_per_us_) {
      ++in_bucket_;
      return true;
    }
    ++dropped_;
    return false;
  }

  std::uint64_t dropped() const { return dropped_; }

 private:
  std::uint32_t max_per_us_;
  std::uint64_t bucket_ = 0;
  std::uint32_t in_bucket_ = 0;
  std::uint64_t dropped_ = 0;
  bool have_bucket_ = false;
};

struct RateLimitResult {
  std::vector<Event> events;
  std::uint64_t dropped = 0;
};

RateLimitResult rate_limit(std::span<const Event> events, std::uint32_t max_per_us);

// ---------------------------------------------------------------------------
// Fixed-count windowing: consecutive non-overlapping windows of exactly n
// events; the trailing partial group is discarded.
// ---------------------------------------------------------------------------

/// Accumulates stamped events and emits a window whenever n have arrived.
class WindowBuilder {
 public:
  explicit WindowBuilder(std::size_t n);

  std::optional<EventWindow> push(const StampedEvent& se);

  std::size_t pending() const { return pending_.size(); }
  std::size_t window_size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<NormalizedEvent> pending_;
  std::uint64_t t_first_ = 0;
  std::uint64_t t_last_ = 0;
};

struct WindowingResult {
  std::vector<EventWindow> windows;
  std::size_t discarded = 0;  // trailing partial events
};

WindowingResult window_fixed_count(std::span<const StampedEvent> events, std::size_t n);

}  // namespace evf
