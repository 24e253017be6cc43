#include "evf/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "evf/errors.hpp"
#include "evf/lstm_infer.hpp"
#include "evf/stream_ops.hpp"

namespace evf {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (std::uint64_t v : row) n += v;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (int i = 0; i < kRegimeCount; ++i) n += counts[i][i];
  return n;
}

std::string ConfusionMatrix::to_text() const {
  std::ostringstream os;
  os << "true\\pred";
  for (FlowRegime r : kAllRegimes) os << '\t' << to_string(r);
  os << '\n';
  for (int i = 0; i < kRegimeCount; ++i) {
    os << to_string(kAllRegimes[i]);
    for (int j = 0; j < kRegimeCount; ++j) os << '\t' << counts[i][j];
    os << '\n';
  }
  return os.str();
}

EvalResult evaluate(const WindowClassifier& classifier, std::span<const EventWindow> windows,
                    std::span<const FlowRegime> labels) {
  if (windows.empty()) throw EmptyEvaluation("evaluation set is empty");
  if (windows.size() != labels.size()) throw InvalidParams("window/label count mismatch");

  EvalResult res;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto probs = classifier(windows[i]);
    int pred = 0;
    for (int c = 1; c < int(probs.size()); ++c)
      if (probs[c] > probs[pred]) pred = c;
    ++res.confusion.counts[regime_code(labels[i])][pred];
  }
  res.accuracy = double(res.confusion.trace()) / double(res.confusion.total());
  for (int c = 0; c < kRegimeCount; ++c) {
    std::uint64_t row = 0;
    for (std::uint64_t v : res.confusion.counts[c]) row += v;
    if (row > 0) res.recall[c] = double(res.confusion.counts[c][c]) / double(row);
  }
  return res;
}

namespace {

using clock = std::chrono::steady_clock;

double us_between(clock::time_point a, clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

}  // namespace

std::vector<SweepRow> sweep_sequence_length(std::span<const StampedRecording> recordings,
                                            const SweepOptions& opts) {
  std::vector<SweepRow> rows;
  for (int length : opts.lengths) {
    SweepRow row;
    row.length = length;
    try {
      // Re-window every recording at this length, timing the stream
      // processing pass.
      std::vector<EventWindow> windows;
      std::vector<FlowRegime> labels;
      const auto proc_start = clock::now();
      for (const StampedRecording& rec : recordings) {
        auto wr = window_fixed_count(rec.events, std::size_t(length));
        for (auto& w : wr.windows) {
          w.label = rec.label;
          windows.push_back(std::move(w));
          labels.push_back(rec.label);
        }
      }
      const double proc_total_us = us_between(proc_start, clock::now());
      if (windows.size() < 4) throw EmptyDataset("too few windows at this length");
      row.mean_proc_us = proc_total_us / double(windows.size());

      // Deterministic stratified train/eval partition.
      std::vector<std::size_t> train_idx, eval_idx;
      {
        Rng rng(opts.hyper.seed ^ std::uint64_t(length) * 0x9e3779b97f4a7c15ULL);
        for (int c = 0; c < kRegimeCount; ++c) {
          std::vector<std::size_t> cls;
          for (std::size_t i = 0; i < labels.size(); ++i)
            if (regime_code(labels[i]) == c) cls.push_back(i);
          if (cls.empty()) continue;
          for (std::size_t i = cls.size(); i > 1; --i)
            std::swap(cls[i - 1], cls[rng.uniform_int(i)]);
          const std::size_t n_train =
              std::max<std::size_t>(1, std::size_t(opts.train_fraction * double(cls.size())));
          for (std::size_t i = 0; i < cls.size(); ++i)
            (i < n_train ? train_idx : eval_idx).push_back(cls[i]);
        }
      }
      if (eval_idx.empty()) throw EmptyDataset("no held-out windows at this length");

      std::vector<EventWindow> train_windows;
      std::vector<FlowRegime> train_labels;
      for (std::size_t i : train_idx) {
        train_windows.push_back(windows[i]);
        train_labels.push_back(labels[i]);
      }

      LstmHyper hyper = opts.hyper;
      hyper.seq_len = length;
      TrainOptions topt;
      topt.early_stop_accuracy = opts.early_stop_accuracy;
      auto trained = train(train_windows, train_labels, hyper, topt);
      row.epochs_ran = int(trained.history.size());

      InferenceEngine engine(trained.params);

      std::size_t correct = 0;
      for (std::size_t i : eval_idx) {
        const auto probs = engine.classify(windows[i]);
        int pred = 0;
        for (int c = 1; c < int(probs.size()); ++c)
          if (probs[c] > probs[pred]) pred = c;
        if (pred == regime_code(labels[i])) ++correct;
      }
      row.accuracy = double(correct) / double(eval_idx.size());
      row.eval_windows = eval_idx.size();

      // Warm-run inference timing: first window excluded, cycle the eval set
      // until enough windows are timed.
      engine.classify(windows[eval_idx[0]]);
      double infer_sum = 0.0;
      std::size_t timed = 0;
      while (timed < opts.min_timed_windows) {
        for (std::size_t i : eval_idx) {
          const auto t0 = clock::now();
          engine.classify(windows[i]);
          infer_sum += us_between(t0, clock::now());
          if (++timed >= opts.min_timed_windows) break;
        }
      }
      row.mean_infer_us = infer_sum / double(timed);
    } catch (const Error&) {
      // training failure for one length leaves a zeroed row; the sweep goes on
      rows.push_back(row);
      if (opts.on_row) opts.on_row(row);
      continue;
    }
    rows.push_back(row);
    if (opts.on_row) opts.on_row(row);
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "length,accuracy,mean_infer_us,mean_proc_us,eval_windows,epochs\n";
  os.precision(10);
  for (const SweepRow& r : rows)
    os << r.length << ',' << r.accuracy << ',' << r.mean_infer_us << ',' << r.mean_proc_us << ','
       << r.eval_windows << ',' << r.epochs_ran << '\n';
  return os.str();
}

}  // namespace evf
