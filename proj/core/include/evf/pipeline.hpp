#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evf/event.hpp"
#include "evf/event_codec.hpp"
#include "evf/flow_regime.hpp"
#include "evf/smoother.hpp"

namespace evf {

/// One classification result flowing to the sink.
struct Prediction {
  std::array<double, kRegimeCount> probabilities{};
  FlowRegime raw_label = FlowRegime::B;
  FlowRegime smoothed_label = FlowRegime::B;
  double softmax_confidence = 0.0;  // max probability
  double vote_confidence = 0.0;     // smoothing-window fraction matching smoothed_label
  double entropy = 0.0;             // nats
  std::uint64_t window_event_count = 0;
  std::uint64_t window_t_end_us = 0;  // source time
  std::uint64_t infer_start_us = 0;   // steady clock, relative to pipeline start
  std::uint64_t infer_end_us = 0;
};

struct PipelineConfig {
  int seq_len = 2500;
  std::uint32_t max_events_per_us = 0;  // 0 disables rate limiting
  int smooth_window = 150;
  std::size_t sink_queue_capacity = 64;
  std::optional<Roi> roi;  // defaults to the full sensor frame
  /// Round-robin single-threaded execution; reproduces offline
  /// classification exactly.
  bool deterministic = false;
};

struct LatencySummary {
  std::uint64_t count = 0;
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
};

struct PipelineStats {
  std::uint64_t windows_produced = 0;
  std::uint64_t windows_classified = 0;
  std::uint64_t windows_dropped = 0;   // replaced in the latest-wins slot
  std::uint64_t windows_in_flight = 0; // unconsumed at shutdown
  std::uint64_t classifier_errors = 0;
  std::uint64_t sink_dropped = 0;      // evicted from the sink queue
  std::uint64_t events_ingested = 0;
  std::uint64_t events_outside_roi = 0;
  std::uint64_t events_rate_limited = 0;
  LatencySummary acquire;  // window assembly time
  LatencySummary infer;    // classifier time
  LatencySummary sink;     // sink consume time
};

/// Live counters shared with sinks that display progress mid-run.
struct PipelineCounters {
  std::atomic<std::uint64_t> windows_produced{0};
  std::atomic<std::uint64_t> windows_classified{0};
  std::atomic<std::uint64_t> windows_dropped{0};
  std::atomic<std::uint64_t> events_ingested{0};
};

/// Pull-based event producer. Implementations throw SourceError on failure.
class EventSource {
 public:
  virtual ~EventSource() = default;
  virtual EvfHeader header() = 0;
  virtual std::optional<Event> next() = 0;
};

/// Replays an in-memory stream; optional real-time pacing honours
/// inter-event timestamps.
class VectorEventSource : public EventSource {
 public:
  VectorEventSource(std::vector<Event> events, EvfHeader header, bool pace_realtime = false,
                    const std::atomic<bool>* stop = nullptr);
  EvfHeader header() override { return header_; }
  std::optional<Event> next() override;

 private:
  std::vector<Event> events_;
  EvfHeader header_;
  std::size_t pos_ = 0;
  bool pace_;
  const std::atomic<bool>* stop_;
  std::uint64_t first_t_us_ = 0;
  std::uint64_t start_wall_us_ = 0;
};

/// Replays an EVF1 file.
class FileEventSource : public VectorEventSource {
 public:
  explicit FileEventSource(const std::string& path, bool pace_realtime = false,
                           const std::atomic<bool>* stop = nullptr);

 private:
  FileEventSource(DecodedEvents decoded, bool pace_realtime, const std::atomic<bool>* stop);
};

/// Prediction consumer. Implementations throw SinkError on failure.
class PredictionSink {
 public:
  virtual ~PredictionSink() = default;
  virtual void consume(const Prediction& p) = 0;
  virtual void finish() {}
};

/// Machine-readable CSV log, one row per prediction.
class CsvSink : public PredictionSink {
 public:
  explicit CsvSink(std::ostream& out, bool include_timing = true);
  void consume(const Prediction& p) override;

  static std::string header_line(bool include_timing = true);
  static std::string format_row(const Prediction& p, bool include_timing = true);

 private:
  std::ostream& out_;
  bool include_timing_;
};

/// Terminal status line, refreshed in place.
class StatusLineSink : public PredictionSink {
 public:
  explicit StatusLineSink(std::ostream& out, const PipelineCounters* counters = nullptr);
  void consume(const Prediction& p) override;
  void finish() override;

 private:
  std::ostream& out_;
  const PipelineCounters* counters_;
};

/// Fans out to several sinks.
class TeeSink : public PredictionSink {
 public:
  explicit TeeSink(std::vector<PredictionSink*> sinks) : sinks_(std::move(sinks)) {}
  void consume(const Prediction& p) override {
    for (auto* s : sinks_) s->consume(p);
  }
  void finish() override {
    for (auto* s : sinks_) s->finish();
  }

 private:
  std::vector<PredictionSink*> sinks_;
};

/// Collects predictions in memory (tests, offline classification).
class CollectSink : public PredictionSink {
 public:
  void consume(const Prediction& p) override { predictions.push_back(p); }
  std::vector<Prediction> predictions;
};

/// Window classifier: probabilities over the regime classes.
using WindowClassifier = std::function<std::vector<double>(const EventWindow&)>;

/// Runs acquisition -> inference -> sink. Threaded by default (acquisition
/// and inference threads plus the caller as sink stage) with a capacity-1
/// latest-wins slot between acquisition and inference and a bounded
/// drop-oldest FIFO to the sink; or deterministic round-robin when
/// config.deterministic is set.
PipelineStats run_pipeline(EventSource& source, const WindowClassifier& classifier,
                           PredictionSink& sink, const PipelineConfig& config,
                           std::atomic<bool>* stop = nullptr,
                           PipelineCounters* counters = nullptr);

/// Offline path: classifies pre-built windows through the same smoothing and
/// entropy chain the pipeline uses.
std::vector<Prediction> classify_windows(std::span<const EventWindow> windows,
                                         const WindowClassifier& classifier, int smooth_window);

}  // namespace evf
