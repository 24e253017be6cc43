#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "evf/event.hpp"
#include "evf/lstm.hpp"

namespace evf {

/// Deployment-path forward pass in f32 (the serialized precision).
/// Input-to-hidden transforms run as one GEMM over the whole window; the
/// embedding affine is folded into layer 0's input weights. Accepts any
/// window length >= 1. Not thread-safe per instance (scratch buffers);
/// copies are cheap relative to weights.
class InferenceEngine {
 public:
  explicit InferenceEngine(const LstmParams& params);
  static InferenceEngine from_file(const std::string& path, const LstmHyper& hyper);

  const LstmHyper& hyper() const { return hyper_; }

  /// Class probabilities (classes entries, summing to 1).
  std::vector<double> classify(const EventWindow& window) const;

  /// argmax of classify().
  FlowRegime predict(const EventWindow& window) const;

 private:
  LstmHyper hyper_;
  Eigen::MatrixXf in_w0_;  // 4H x 3: wx(0) * embed_w
  Eigen::VectorXf in_b0_;  // wx(0) * embed_b + bias(0)
  std::vector<Eigen::MatrixXf> wx_;  // layers 1.., 4H x H
  std::vector<Eigen::VectorXf> b_;
  std::vector<Eigen::MatrixXf> wh_;  // all layers
  Eigen::MatrixXf fc1_w_, fc2_w_, head_w_;
  Eigen::VectorXf fc1_b_, fc2_b_, head_b_;

  mutable Eigen::MatrixXf x_, pre_, h_all_;
  mutable Eigen::VectorXf gates_, h_, c_, tc_;
};

}  // namespace evf
