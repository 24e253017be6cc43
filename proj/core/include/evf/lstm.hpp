#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evf/event.hpp"
#include "evf/flow_regime.hpp"
#include "evf/rng.hpp"

namespace evf {

/// Event LSTM hyperparameters. Defaults: (xn, yn, p) embedded into 32 dims,
/// two LSTM layers of 128 hidden units, two 128-unit FC layers with dropout
/// 0.3, softmax over 7 classes; Adam lr 3e-4, clip norm 1.0, batch 128,
/// 10 epochs.
struct LstmHyper {
  int embed_dim = 32;
  int hidden = 128;
  int layers = 2;
  int fc_dim = 128;
  int classes = 7;
  int seq_len = 5000;  // real-time deployments default to 2500
  double dropout_rate = 0.3;
  double lr = 3e-4;
  double clip_norm = 1.0;
  int batch = 128;
  int epochs = 10;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t param_count() const;
  int layer_input_dim(int layer) const { return layer == 0 ? embed_dim : hidden; }
};

/// All learnable parameters as one flat f64 vector with Eigen views.
/// The flat order is the serialization order: embedding W/b, then per layer
/// input weights / recurrent weights / bias, then FC1, FC2, head.
class LstmParams {
 public:
  explicit LstmParams(const LstmHyper& hyper);  // zero-initialized

  /// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases except
  /// the LSTM forget-gate bias which starts at 1.
  static LstmParams initialized(const LstmHyper& hyper, Rng& rng);

  const LstmHyper& hyper() const { return hyper_; }
  std::size_t size() const { return flat_.size(); }
  std::vector<double>& flat() { return flat_; }
  const std::vector<double>& flat() const { return flat_; }

  using Mat = Eigen::Map<Eigen::MatrixXd>;
  using Vec = Eigen::Map<Eigen::VectorXd>;
  using CMat = Eigen::Map<const Eigen::MatrixXd>;
  using CVec = Eigen::Map<const Eigen::VectorXd>;

  Mat embed_w();        // embed_dim x 3
  Vec embed_b();
  Mat wx(int layer);    // 4*hidden x layer_input_dim
  Mat wh(int layer);    // 4*hidden x hidden
  Vec bias(int layer);  // 4*hidden; gate row order i, f, g, o
  Mat fc1_w();          // fc_dim x hidden
  Vec fc1_b();
  Mat fc2_w();          // fc_dim x fc_dim
  Vec fc2_b();
  Mat head_w();         // classes x fc_dim
  Vec head_b();

  CMat embed_w() const;
  CVec embed_b() const;
  CMat wx(int layer) const;
  CMat wh(int layer) const;
  CVec bias(int layer) const;
  CMat fc1_w() const;
  CVec fc1_b() const;
  CMat fc2_w() const;
  CVec fc2_b() const;
  CMat head_w() const;
  CVec head_b() const;

 private:
  LstmHyper hyper_;
  std::vector<double> flat_;
  // offsets into flat_: embed_w, embed_b, per layer {wx, wh, b}, fc1_w,
  // fc1_b, fc2_w, fc2_b, head_w, head_b
  std::vector<std::size_t> offsets_;

  double* seg(int idx) { return flat_.data() + offsets_[idx]; }
  const double* seg(int idx) const { return flat_.data() + offsets_[idx]; }
};

/// Class probabilities for one window. Dropout is active only in train mode;
/// inference consumes no randomness and is deterministic.
std::vector<double> forward(const LstmParams& params, const EventWindow& window, bool train_mode,
                            Rng& rng);

struct LossAndGrad {
  double loss = 0.0;
  LstmParams grads;
};

/// Mean cross-entropy and exact full-sequence BPTT gradients, averaged over
/// the batch. Dropout masks are sampled per window from rng before any
/// computation, in window order.
LossAndGrad loss_and_grad(const LstmParams& params, std::span<const EventWindow> windows,
                          std::span<const FlowRegime> labels, Rng& rng);

/// Pointer-based variant used by the trainer to avoid copying windows.
LossAndGrad loss_and_grad(const LstmParams& params,
                          std::span<const EventWindow* const> windows,
                          std::span<const FlowRegime> labels, Rng& rng);

struct AdamState {
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  std::vector<double> m, v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Global-norm gradient clipping (scales grads in place when the norm
/// exceeds clip_norm), then a bias-corrected Adam update.
void adam_step(LstmParams& params, LstmParams& grads, AdamState& state, double lr,
               double clip_norm);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainOptions {
  double val_fraction = 0.2;
  /// Stop once held-out accuracy reaches this value.
  std::optional<double> early_stop_accuracy;
  /// Explicit validation indices (into the caller's window order); when
  /// absent an 80/20 stratified split is derived from the seed.
  std::optional<std::vector<std::size_t>> val_indices;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  LstmParams params;
  std::vector<EpochStats> history;
};

/// Seeded training loop: canonical dataset ordering, stratified split,
/// per-epoch seeded shuffling, Adam with clipping.
TrainResult train(std::span<const EventWindow> windows, std::span<const FlowRegime> labels,
                  const LstmHyper& hyper, const TrainOptions& opts = {});

// "ELS1" parameter file: 16-byte header (magic 45 4c 53 31, u32 version(=1),
// u32 param_count, u32 reserved) followed by param_count little-endian f32
// values in flat order.
std::vector<std::uint8_t> serialize_params(const LstmParams& params);
LstmParams deserialize_params(std::span<const std::uint8_t> bytes, const LstmHyper& hyper);

void save_params(const std::string& path, const LstmParams& params);
LstmParams load_params(const std::string& path, const LstmHyper& hyper);

}  // namespace evf
