#include "evf/lstm_infer.hpp"

#include <cmath>

#include "evf/errors.hpp"
#include "evf/event_codec.hpp"

namespace evf {

InferenceEngine::InferenceEngine(const LstmParams& params) : hyper_(params.hyper()) {
  const int H = hyper_.hidden;

  const Eigen::MatrixXf emb_w = params.embed_w().cast<float>();
  const Eigen::VectorXf emb_b = params.embed_b().cast<float>();
  const Eigen::MatrixXf wx0 = params.wx(0).cast<float>();
  in_w0_.noalias() = wx0 * emb_w;
  in_b0_.noalias() = wx0 * emb_b + params.bias(0).cast<float>();

  wh_.reserve(hyper_.layers);
  for (int l = 0; l < hyper_.layers; ++l) wh_.push_back(params.wh(l).cast<float>());
  for (int l = 1; l < hyper_.layers; ++l) {
    wx_.push_back(params.wx(l).cast<float>());
    b_.push_back(params.bias(l).cast<float>());
  }

  fc1_w_ = params.fc1_w().cast<float>();
  fc1_b_ = params.fc1_b().cast<float>();
  fc2_w_ = params.fc2_w().cast<float>();
  fc2_b_ = params.fc2_b().cast<float>();
  head_w_ = params.head_w().cast<float>();
  head_b_ = params.head_b().cast<float>();

  gates_.resize(4 * H);
  h_.resize(H);
  c_.resize(H);
  tc_.resize(H);
}

InferenceEngine InferenceEngine::from_file(const std::string& path, const LstmHyper& hyper) {
  return InferenceEngine(load_params(path, hyper));
}

std::vector<double> InferenceEngine::classify(const EventWindow& window) const {
  const int H = hyper_.hidden;
  const int T = int(window.events.size());
  if (T < 1) throw LengthMismatch("empty window");

  x_.resize(3, T);
  for (int t = 0; t < T; ++t) {
    const NormalizedEvent& ev = window.events[t];
    if (!std::isfinite(ev.xn) || !std::isfinite(ev.yn))
      throw NonFiniteInput("non-finite normalized coordinate in window");
    x_(0, t) = float(ev.xn);
    x_(1, t) = float(ev.yn);
    x_(2, t) = float(ev.p);
  }

  auto run_layer = [&](int layer) {
    const Eigen::MatrixXf& wh = wh_[layer];
    h_.setZero();
    c_.setZero();
    for (int t = 0; t < T; ++t) {
      gates_ = pre_.col(t);
      if (t > 0) gates_.noalias() += wh * h_;
      auto i = gates_.segment(0, H).array();
      auto f = gates_.segment(H, H).array();
      auto g = gates_.segment(2 * H, H).array();
      auto o = gates_.segment(3 * H, H).array();
      i = 1.0f / (1.0f + (-i).exp());
      f = 1.0f / (1.0f + (-f).exp());
      g = g.tanh();
      o = 1.0f / (1.0f + (-o).exp());
      c_.array() = f * c_.array() + i * g;
      tc_.array() = c_.array().tanh();
      h_.array() = o * tc_.array();
      if (layer + 1 < hyper_.layers) h_all_.col(t) = h_;
    }
  };

  if (hyper_.layers > 1) h_all_.resize(H, T);

  pre_.noalias() = in_w0_ * x_;
  pre_.colwise() += in_b0_;
  run_layer(0);

  for (int l = 1; l < hyper_.layers; ++l) {
    pre_.noalias() = wx_[l - 1] * h_all_;
    pre_.colwise() += b_[l - 1];
    run_layer(l);
  }

  Eigen::VectorXf a1 = (fc1_w_ * h_ + fc1_b_).cwiseMax(0.0f);
  Eigen::VectorXf a2 = (fc2_w_ * a1 + fc2_b_).cwiseMax(0.0f);
  Eigen::VectorXf logits = head_w_ * a2 + head_b_;

  // softmax in double
  const double m = double(logits.maxCoeff());
  std::vector<double> probs(hyper_.classes);
  double sum = 0.0;
  for (int i = 0; i < hyper_.classes; ++i) {
    probs[i] = std::exp(double(logits[i]) - m);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

FlowRegime InferenceEngine::predict(const EventWindow& window) const {
  const auto probs = classify(window);
  int best = 0;
  for (int i = 1; i < hyper_.classes; ++i)
    if (probs[i] > probs[best]) best = i;
  return regime_from_code(best);
}

}  // namespace evf
