#include "evf/stream_ops.hpp"

#include "evf/errors.hpp"

namespace evf {

std::optional<NormalizedEvent> normalize_event(const Event& e, const Roi& roi) {
  int x = e.x, y = e.y;
  if (x < roi.x0 || y < roi.y0 || x >= roi.x0 + roi.width || y >= roi.y0 + roi.height)
    return std::nullopt;
  double xn = roi.width > 1 ? double(x - roi.x0) / double(roi.width - 1) : 0.0;
  double yn = roi.height > 1 ? double(y - roi.y0) / double(roi.height - 1) : 0.0;
  return NormalizedEvent{xn, yn, e.p};
}

std::vector<NormalizedEvent> normalize_roi(std::span<const Event> events, const Roi& roi,
                                           int sensor_width, int sensor_height) {
  validate_roi(roi, sensor_width, sensor_height);
  std::vector<NormalizedEvent> out;
  out.reserve(events.size());
  for (const Event& e : events)
    if (auto ne = normalize_event(e, roi)) out.push_back(*ne);
  return out;
}

std::vector<StampedEvent> normalize_roi_stamped(std::span<const Event> events, const Roi& roi,
                                                int sensor_width, int sensor_height) {
  validate_roi(roi, sensor_width, sensor_height);
  std::vector<StampedEvent> out;
  out.reserve(events.size());
  for (const Event& e : events)
    if (auto ne = normalize_event(e, roi)) out.push_back(StampedEvent{*ne, e.t});
  return out;
}

RateLimitResult rate_limit(std::span<const Event> events, std::uint32_t max_per_us) {
  RateLimiter limiter(max_per_us);
  RateLimitResult out;
  out.events.reserve(events.size());
  for (const Event& e : events)
    if (limiter.admit(e.t)) out.events.push_back(e);
  out.dropped = limiter.dropped();
  return out;
}

WindowBuilder::WindowBuilder(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidParams("window size must be >= 1");
  pending_.reserve(n);
}

std::optional<EventWindow> WindowBuilder::push(const StampedEvent& se) {
  if (pending_.empty()) t_first_ = se.t;
  t_last_ = se.t;
  pending_.push_back(se.ev);
  if (pending_.size() < n_) return std::nullopt;
  EventWindow w;
  w.events = std::move(pending_);
  w.t_start = t_first_;
  w.t_end = t_last_;
  pending_ = {};
  pending_.reserve(n_);
  return w;
}

WindowingResult window_fixed_count(std::span<const StampedEvent> events, std::size_t n) {
  WindowBuilder builder(n);
  WindowingResult out;
  for (const StampedEvent& se : events)
    if (auto w = builder.push(se)) out.windows.push_back(std::move(*w));
  out.discarded = builder.pending();
  return out;
}

}  // namespace evf
