#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evf/event.hpp"
#include "evf/flow_regime.hpp"
#include "evf/lstm.hpp"
#include "evf/pipeline.hpp"

namespace evf {

/// 7x7 counts, rows = true class, columns = predicted.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kRegimeCount>, kRegimeCount> counts{};

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::string to_text() const;
};

struct EvalResult {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  /// Per-class recall; absent for classes with no samples.
  std::array<std::optional<double>, kRegimeCount> recall{};
};

/// Accuracy = trace/total; throws EmptyEvaluation on an empty set.
EvalResult evaluate(const WindowClassifier& classifier, std::span<const EventWindow> windows,
                    std::span<const FlowRegime> labels);

/// A normalized event stream of one regime, ready for re-windowing at any
/// sequence length.
struct StampedRecording {
  std::vector<StampedEvent> events;
  FlowRegime label = FlowRegime::B;
};

struct SweepRow {
  int length = 0;
  double accuracy = 0.0;
  double mean_infer_us = 0.0;  // model forward per window, first window excluded
  double mean_proc_us = 0.0;   // windowing + input prep per window
  std::size_t eval_windows = 0;
  int epochs_ran = 0;
};

struct SweepOptions {
  std::vector<int> lengths = {1000, 2500, 5000, 10000};
  LstmHyper hyper;  // seq_len is overridden per length
  double train_fraction = 0.6;
  std::optional<double> early_stop_accuracy = 0.99;
  std::size_t min_timed_windows = 100;
  std::function<void(const SweepRow&)> on_row;
};

/// Re-windows the recordings at each length, trains a matching model, and
/// records held-out accuracy plus mean inference/processing wall time.
/// A length whose training fails is skipped; the sweep continues.
std::vector<SweepRow> sweep_sequence_length(std::span<const StampedRecording> recordings,
                                            const SweepOptions& opts);

std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace evf
