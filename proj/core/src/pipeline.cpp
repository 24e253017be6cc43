#include "evf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "evf/errors.hpp"
#include "evf/queues.hpp"
#include "evf/stream_ops.hpp"

namespace evf {

namespace {

using clock = std::chrono::steady_clock;

std::uint64_t wall_us() {
  return std::uint64_t(
      std::chrono::duration_cast<std::chrono::microseconds>(clock::now().time_since_epoch())
          .count());
}

LatencySummary summarize(std::vector<double>& samples_us) {
  LatencySummary s;
  s.count = samples_us.size();
  if (samples_us.empty()) return s;
  double sum = 0.0;
  for (double v : samples_us) sum += v;
  s.mean_us = sum / double(samples_us.size());
  std::sort(samples_us.begin(), samples_us.end());
  auto rank = [&](double q) {
    const std::size_t idx = std::size_t(std::ceil(q * double(samples_us.size()))) - 1;
    return samples_us[std::min(idx, samples_us.size() - 1)];
  };
  s.p50_us = rank(0.50);
  s.p95_us = rank(0.95);
  s.p99_us = rank(0.99);
  return s;
}

int argmax7(const std::vector<double>& probs) {
  int best = 0;
  for (int i = 1; i < int(probs.size()); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

Prediction make_prediction(const EventWindow& window, const std::vector<double>& probs,
                           Smoother& smoother) {
  if (int(probs.size()) != kRegimeCount)
    throw InvalidParams("classifier must produce one probability per regime");
  Prediction p;
  std::copy(probs.begin(), probs.end(), p.probabilities.begin());
  p.raw_label = regime_from_code(argmax7(probs));
  p.smoothed_label = smoother.push(p.raw_label);
  p.softmax_confidence = probs[regime_code(p.raw_label)];
  p.vote_confidence = smoother.vote_fraction(p.smoothed_label);
  p.entropy = predictive_entropy(probs);
  p.window_event_count = window.events.size();
  p.window_t_end_us = window.t_end;
  return p;
}

}  // namespace

// --- sources ---

VectorEventSource::VectorEventSource(std::vector<Event> events, EvfHeader header,
                                     bool pace_realtime, const std::atomic<bool>* stop)
    : events_(std::move(events)), header_(header), pace_(pace_realtime), stop_(stop) {
  if (!events_.empty()) first_t_us_ = events_.front().t;
  start_wall_us_ = wall_us();
}

std::optional<Event> VectorEventSource::next() {
  if (pos_ >= events_.size()) return std::nullopt;
  const Event e = events_[pos_++];
  if (pace_) {
    // sleep in short slices so a stop signal is honoured promptly
    const std::uint64_t due = start_wall_us_ + (e.t - first_t_us_);
    while (true) {
      if (stop_ && stop_->load(std::memory_order_relaxed)) break;
      const std::uint64_t now = wall_us();
      if (now >= due) break;
      std::this_thread::sleep_for(std::chrono::microseconds(std::min<std::uint64_t>(due - now, 5000)));
    }
  }
  return e;
}

FileEventSource::FileEventSource(const std::string& path, bool pace_realtime,
                                 const std::atomic<bool>* stop)
    : FileEventSource(
          [&path] {
            try {
              return read_evf_file(path);
            } catch (const SourceError&) {
              throw;
            } catch (const std::exception& e) {
              throw SourceError("replay source: " + std::string(e.what()));
            }
          }(),
          pace_realtime, stop) {}

FileEventSource::FileEventSource(DecodedEvents decoded, bool pace_realtime,
                                 const std::atomic<bool>* stop)
    : VectorEventSource(std::move(decoded.events), decoded.header, pace_realtime, stop) {}

// --- sinks ---

CsvSink::CsvSink(std::ostream& out, bool include_timing) : out_(out), include_timing_(include_timing) {
  out_ << header_line(include_timing_) << '\n';
  if (!out_) throw SinkError("csv sink write failed");
}

std::string CsvSink::header_line(bool include_timing) {
  std::string h =
      "window_t_end_us,raw_label,smoothed_label,softmax_confidence,vote_confidence,"
      "entropy_nats,event_count,p_B,p_EB,p_S,p_SS,p_SW,p_A,p_U";
  if (include_timing) h += ",infer_start_us,infer_end_us";
  return h;
}

std::string CsvSink::format_row(const Prediction& p, bool include_timing) {
  std::ostringstream os;
  os.precision(17);
  os << p.window_t_end_us << ',' << to_string(p.raw_label) << ',' << to_string(p.smoothed_label)
     << ',' << p.softmax_confidence << ',' << p.vote_confidence << ',' << p.entropy << ','
     << p.window_event_count;
  for (double v : p.probabilities) os << ',' << v;
  if (include_timing) os << ',' << p.infer_start_us << ',' << p.infer_end_us;
  return os.str();
}

void CsvSink::consume(const Prediction& p) {
  out_ << format_row(p, include_timing_) << '\n';
  if (!out_) throw SinkError("csv sink write failed");
}

StatusLineSink::StatusLineSink(std::ostream& out, const PipelineCounters* counters)
    : out_(out), counters_(counters) {}

void StatusLineSink::consume(const Prediction& p) {
  std::ostringstream os;
  os.precision(3);
  os << "\r" << to_string(p.smoothed_label) << " (raw " << to_string(p.raw_label) << ")"
     << "  vote " << p.vote_confidence << "  softmax " << p.softmax_confidence << "  H "
     << p.entropy << " nats"
     << "  events " << p.window_event_count;
  if (counters_)
    os << "  windows " << counters_->windows_classified.load() << "  dropped "
       << counters_->windows_dropped.load();
  os << "    ";
  out_ << os.str() << std::flush;
  if (!out_) throw SinkError("status sink write failed");
}

void StatusLineSink::finish() { out_ << '\n' << std::flush; }

// --- pipeline ---

namespace {

/// Acquisition-side state shared by both execution modes.
struct Acquisition {
  Acquisition(const PipelineConfig& cfg, const EvfHeader& hdr)
      : roi(cfg.roi.value_or(Roi{0, 0, hdr.width, hdr.height})),
        limiter(cfg.max_events_per_us),
        builder(std::size_t(cfg.seq_len)),
        limit_enabled(cfg.max_events_per_us > 0) {
    validate_roi(roi, hdr.width, hdr.height);
  }

  Roi roi;
  RateLimiter limiter;
  WindowBuilder builder;
  bool limit_enabled;
  std::uint64_t outside_roi = 0;
  std::uint64_t first_event_wall_us = 0;

  std::optional<EventWindow> feed(const Event& e) {
    auto ne = normalize_event(e, roi);
    if (!ne) {
      ++outside_roi;
      return std::nullopt;
    }
    if (limit_enabled && !limiter.admit(e.t)) return std::nullopt;
    if (builder.pending() == 0) first_event_wall_us = wall_us();
    return builder.push(StampedEvent{*ne, e.t});
  }
};

}  // namespace

PipelineStats run_pipeline(EventSource& source, const WindowClassifier& classifier,
                           PredictionSink& sink, const PipelineConfig& config,
                           std::atomic<bool>* stop, PipelineCounters* counters) {
  if (config.seq_len < 1) throw InvalidParams("seq_len must be >= 1");
  if (config.smooth_window < 1) throw InvalidParams("smooth_window must be >= 1");

  PipelineStats stats;
  PipelineCounters local_counters;
  PipelineCounters& live = counters ? *counters : local_counters;

  Acquisition acq(config, source.header());
  Smoother smoother(config.smooth_window);

  std::vector<double> acquire_lat, infer_lat, sink_lat;
  const std::uint64_t t_base = wall_us();

  auto classify_one = [&](const EventWindow& window) -> std::optional<Prediction> {
    const std::uint64_t t0 = wall_us();
    std::vector<double> probs;
    try {
      probs = classifier(window);
    } catch (const std::exception&) {
      ++stats.classifier_errors;
      return std::nullopt;
    }
    Prediction p = make_prediction(window, probs, smoother);
    p.infer_start_us = t0 - t_base;
    p.infer_end_us = wall_us() - t_base;
    infer_lat.push_back(double(p.infer_end_us - p.infer_start_us));
    ++stats.windows_classified;
    live.windows_classified.fetch_add(1, std::memory_order_relaxed);
    return p;
  };

  if (config.deterministic) {
    // Round-robin: every window is classified and delivered in order.
    while (true) {
      if (stop && stop->load(std::memory_order_relaxed)) break;
      std::optional<Event> e;
      try {
        e = source.next();
      } catch (const SourceError&) {
        throw;
      } catch (const std::exception& ex) {
        throw SourceError(ex.what());
      }
      if (!e) break;
      ++stats.events_ingested;
      live.events_ingested.fetch_add(1, std::memory_order_relaxed);
      auto window = acq.feed(*e);
      if (!window) continue;
      ++stats.windows_produced;
      live.windows_produced.fetch_add(1, std::memory_order_relaxed);
      acquire_lat.push_back(double(wall_us() - acq.first_event_wall_us));
      if (auto p = classify_one(*window)) {
        const std::uint64_t s0 = wall_us();
        sink.consume(*p);
        sink_lat.push_back(double(wall_us() - s0));
      }
    }
    sink.finish();
  } else {
    LatestSlot<EventWindow> slot;
    BoundedQueue<Prediction> sink_queue(config.sink_queue_capacity);
    std::exception_ptr source_error, sink_error;

    std::thread acquire_thread([&] {
      try {
        while (true) {
          if (stop && stop->load(std::memory_order_relaxed)) break;
          auto e = source.next();
          if (!e) break;
          ++stats.events_ingested;
          live.events_ingested.fetch_add(1, std::memory_order_relaxed);
          auto window = acq.feed(*e);
          if (!window) continue;
          ++stats.windows_produced;
          live.windows_produced.fetch_add(1, std::memory_order_relaxed);
          acquire_lat.push_back(double(wall_us() - acq.first_event_wall_us));
          if (slot.push(std::move(*window)))
            live.windows_dropped.fetch_add(1, std::memory_order_relaxed);
        }
      } catch (...) {
        source_error = std::current_exception();
      }
      slot.close();
    });

    std::thread infer_thread([&] {
      while (true) {
        if (stop && stop->load(std::memory_order_relaxed)) break;
        auto window = slot.pop_wait();
        if (!window) break;
        if (auto p = classify_one(*window)) sink_queue.push(std::move(*p));
      }
      sink_queue.close();
    });

    // caller thread runs the sink stage
    try {
      while (true) {
        auto p = sink_queue.pop_wait();
        if (!p) break;
        const std::uint64_t s0 = wall_us();
        sink.consume(*p);
        sink_lat.push_back(double(wall_us() - s0));
      }
      sink.finish();
    } catch (...) {
      sink_error = std::current_exception();
      if (stop) stop->store(true);
      // unblock producers
      slot.close();
      sink_queue.close();
    }

    acquire_thread.join();
    infer_thread.join();

    stats.windows_in_flight = slot.has_pending() ? 1 : 0;
    stats.windows_dropped = slot.replaced_count();
    stats.sink_dropped = sink_queue.dropped_count();

    if (source_error) std::rethrow_exception(source_error);
    if (sink_error) std::rethrow_exception(sink_error);
  }

  stats.events_outside_roi = acq.outside_roi;
  stats.events_rate_limited = acq.limiter.dropped();
  live.windows_dropped.store(stats.windows_dropped);
  stats.acquire = summarize(acquire_lat);
  stats.infer = summarize(infer_lat);
  stats.sink = summarize(sink_lat);
  return stats;
}

std::vector<Prediction> classify_windows(std::span<const EventWindow> windows,
                                         const WindowClassifier& classifier, int smooth_window) {
  Smoother smoother(smooth_window);
  std::vector<Prediction> out;
  out.reserve(windows.size());
  for (const EventWindow& w : windows) out.push_back(make_prediction(w, classifier(w), smoother));
  return out;
}

}  // namespace evf
