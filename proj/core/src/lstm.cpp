#include "evf/lstm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

#include "evf/errors.hpp"
#include "evf/event_codec.hpp"
#include "evf/lstm_infer.hpp"

namespace evf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Windows per lockstep chunk; bounds activation-cache memory while keeping
// the recurrent products matrix-matrix shaped.
constexpr int kChunk = 16;

constexpr std::uint8_t kElsMagic[4] = {0x45, 0x4c, 0x53, 0x31};  // "ELS1"

}  // namespace

void LstmHyper::validate() const {
  if (embed_dim <= 0 || hidden <= 0 || layers <= 0 || fc_dim <= 0 || classes <= 0 ||
      seq_len <= 0 || batch <= 0 || epochs <= 0)
    throw InvalidParams("lstm hyperparameters must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw InvalidParams("dropout_rate must be in [0, 1)");
  if (lr <= 0.0 || clip_norm <= 0.0) throw InvalidParams("lr and clip_norm must be positive");
}

std::size_t LstmHyper::param_count() const {
  std::size_t n = std::size_t(embed_dim) * 3 + embed_dim;
  for (int l = 0; l < layers; ++l) {
    const std::size_t in = layer_input_dim(l);
    n += std::size_t(4 * hidden) * in + std::size_t(4 * hidden) * hidden + 4 * hidden;
  }
  n += std::size_t(fc_dim) * hidden + fc_dim;
  n += std::size_t(fc_dim) * fc_dim + fc_dim;
  n += std::size_t(classes) * fc_dim + classes;
  return n;
}

LstmParams::LstmParams(const LstmHyper& hyper) : hyper_(hyper) {
  hyper_.validate();
  offsets_.reserve(2 + 3 * hyper_.layers + 6);
  std::size_t off = 0;
  auto add = [&](std::size_t n) {
    offsets_.push_back(off);
    off += n;
  };
  add(std::size_t(hyper_.embed_dim) * 3);
  add(hyper_.embed_dim);
  for (int l = 0; l < hyper_.layers; ++l) {
    add(std::size_t(4 * hyper_.hidden) * hyper_.layer_input_dim(l));
    add(std::size_t(4 * hyper_.hidden) * hyper_.hidden);
    add(std::size_t(4 * hyper_.hidden));
  }
  add(std::size_t(hyper_.fc_dim) * hyper_.hidden);
  add(hyper_.fc_dim);
  add(std::size_t(hyper_.fc_dim) * hyper_.fc_dim);
  add(hyper_.fc_dim);
  add(std::size_t(hyper_.classes) * hyper_.fc_dim);
  add(hyper_.classes);
  flat_.assign(off, 0.0);
}

LstmParams::Mat LstmParams::embed_w() { return {seg(0), hyper_.embed_dim, 3}; }
LstmParams::Vec LstmParams::embed_b() { return {seg(1), hyper_.embed_dim}; }
LstmParams::Mat LstmParams::wx(int l) { return {seg(2 + 3 * l), 4 * hyper_.hidden, hyper_.layer_input_dim(l)}; }
LstmParams::Mat LstmParams::wh(int l) { return {seg(3 + 3 * l), 4 * hyper_.hidden, hyper_.hidden}; }
LstmParams::Vec LstmParams::bias(int l) { return {seg(4 + 3 * l), 4 * hyper_.hidden}; }
LstmParams::Mat LstmParams::fc1_w() { return {seg(2 + 3 * hyper_.layers), hyper_.fc_dim, hyper_.hidden}; }
LstmParams::Vec LstmParams::fc1_b() { return {seg(3 + 3 * hyper_.layers), hyper_.fc_dim}; }
LstmParams::Mat LstmParams::fc2_w() { return {seg(4 + 3 * hyper_.layers), hyper_.fc_dim, hyper_.fc_dim}; }
LstmParams::Vec LstmParams::fc2_b() { return {seg(5 + 3 * hyper_.layers), hyper_.fc_dim}; }
LstmParams::Mat LstmParams::head_w() { return {seg(6 + 3 * hyper_.layers), hyper_.classes, hyper_.fc_dim}; }
LstmParams::Vec LstmParams::head_b() { return {seg(7 + 3 * hyper_.layers), hyper_.classes}; }

LstmParams::CMat LstmParams::embed_w() const { return {seg(0), hyper_.embed_dim, 3}; }
LstmParams::CVec LstmParams::embed_b() const { return {seg(1), hyper_.embed_dim}; }
LstmParams::CMat LstmParams::wx(int l) const { return {seg(2 + 3 * l), 4 * hyper_.hidden, hyper_.layer_input_dim(l)}; }
LstmParams::CMat LstmParams::wh(int l) const { return {seg(3 + 3 * l), 4 * hyper_.hidden, hyper_.hidden}; }
LstmParams::CVec LstmParams::bias(int l) const { return {seg(4 + 3 * l), 4 * hyper_.hidden}; }
LstmParams::CMat LstmParams::fc1_w() const { return {seg(2 + 3 * hyper_.layers), hyper_.fc_dim, hyper_.hidden}; }
LstmParams::CVec LstmParams::fc1_b() const { return {seg(3 + 3 * hyper_.layers), hyper_.fc_dim}; }
LstmParams::CMat LstmParams::fc2_w() const { return {seg(4 + 3 * hyper_.layers), hyper_.fc_dim, hyper_.fc_dim}; }
LstmParams::CVec LstmParams::fc2_b() const { return {seg(5 + 3 * hyper_.layers), hyper_.fc_dim}; }
LstmParams::CMat LstmParams::head_w() const { return {seg(6 + 3 * hyper_.layers), hyper_.classes, hyper_.fc_dim}; }
LstmParams::CVec LstmParams::head_b() const { return {seg(7 + 3 * hyper_.layers), hyper_.classes}; }

LstmParams LstmParams::initialized(const LstmHyper& hyper, Rng& rng) {
  LstmParams p(hyper);
  auto fill = [&rng](Mat m) {
    const double bound = 1.0 / std::sqrt(double(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
  };
  fill(p.embed_w());
  for (int l = 0; l < hyper.layers; ++l) {
    fill(p.wx(l));
    fill(p.wh(l));
    p.bias(l).segment(hyper.hidden, hyper.hidden).setOnes();  // forget gate
  }
  fill(p.fc1_w());
  fill(p.fc2_w());
  fill(p.head_w());
  return p;
}

namespace {

// Activation cache for one lockstep chunk, time-major blocks of width B
// (column t*B + b holds window b at step t).
struct LayerCache {
  MatrixXd gates;  // 4H x BT, post-activation: rows [0,H) i, [H,2H) f, [2H,3H) g, [3H,4H) o
  MatrixXd c;      // H x BT
  MatrixXd h;      // H x BT
};

struct ChunkCache {
  int B = 0, T = 0;
  MatrixXd x;      // 3 x BT
  MatrixXd embed;  // E x BT
  std::vector<LayerCache> layers;
  MatrixXd fc1_pre, fc1_act;  // fc_dim x B; act is post-relu+mask
  MatrixXd fc2_pre, fc2_act;
  MatrixXd probs;  // classes x B
};

void fill_inputs(MatrixXd& x, std::span<const EventWindow* const> windows, int seq_len) {
  const int B = int(windows.size());
  for (int b = 0; b < B; ++b) {
    const EventWindow& w = *windows[b];
    if (int(w.events.size()) != seq_len)
      throw LengthMismatch("window length " + std::to_string(w.events.size()) +
                           " != configured seq_len " + std::to_string(seq_len));
    for (int t = 0; t < seq_len; ++t) {
      const NormalizedEvent& ev = w.events[t];
      if (!std::isfinite(ev.xn) || !std::isfinite(ev.yn))
        throw NonFiniteInput("non-finite normalized coordinate in window");
      const std::size_t col = std::size_t(t) * B + b;
      x(0, col) = ev.xn;
      x(1, col) = ev.yn;
      x(2, col) = double(ev.p);
    }
  }
}

void forward_chunk(const LstmParams& params, ChunkCache& cc, const MatrixXd* mask1,
                   const MatrixXd* mask2) {
  const LstmHyper& hp = params.hyper();
  const int H = hp.hidden, B = cc.B, T = cc.T;
  const Eigen::Index BT = Eigen::Index(B) * T;

  cc.embed.noalias() = params.embed_w() * cc.x;
  cc.embed.colwise() += params.embed_b();

  cc.layers.resize(hp.layers);
  const MatrixXd* input = &cc.embed;
  for (int l = 0; l < hp.layers; ++l) {
    LayerCache& lc = cc.layers[l];
    lc.gates.resize(4 * H, BT);
    lc.c.resize(H, BT);
    lc.h.resize(H, BT);

    lc.gates.noalias() = params.wx(l) * (*input);
    lc.gates.colwise() += params.bias(l);

    const auto wh = params.wh(l);
    for (int t = 0; t < T; ++t) {
      auto g = lc.gates.middleCols(Eigen::Index(t) * B, B);
      if (t > 0) g.noalias() += wh * lc.h.middleCols(Eigen::Index(t - 1) * B, B);

      auto zi = g.topRows(H).array();
      auto zf = g.middleRows(H, H).array();
      auto zg = g.middleRows(2 * H, H).array();
      auto zo = g.middleRows(3 * H, H).array();
      zi = 1.0 / (1.0 + (-zi).exp());
      zf = 1.0 / (1.0 + (-zf).exp());
      zg = zg.tanh();
      zo = 1.0 / (1.0 + (-zo).exp());

      auto c_t = lc.c.middleCols(Eigen::Index(t) * B, B);
      if (t > 0)
        c_t = zf * lc.c.middleCols(Eigen::Index(t - 1) * B, B).array() + zi * zg;
      else
        c_t = (zi * zg).matrix();
      lc.h.middleCols(Eigen::Index(t) * B, B) = (zo * c_t.array().tanh()).matrix();
    }
    input = &lc.h;
  }

  const auto h_final = cc.layers.back().h.middleCols(Eigen::Index(T - 1) * B, B);

  cc.fc1_pre.noalias() = params.fc1_w() * h_final;
  cc.fc1_pre.colwise() += params.fc1_b();
  cc.fc1_act = cc.fc1_pre.cwiseMax(0.0);
  if (mask1) cc.fc1_act.array() *= mask1->array();

  cc.fc2_pre.noalias() = params.fc2_w() * cc.fc1_act;
  cc.fc2_pre.colwise() += params.fc2_b();
  cc.fc2_act = cc.fc2_pre.cwiseMax(0.0);
  if (mask2) cc.fc2_act.array() *= mask2->array();

  MatrixXd logits = params.head_w() * cc.fc2_act;
  logits.colwise() += params.head_b();

  cc.probs.resize(hp.classes, B);
  for (int b = 0; b < B; ++b) {
    const double m = logits.col(b).maxCoeff();
    VectorXd e = (logits.col(b).array() - m).exp();
    cc.probs.col(b) = e / e.sum();
  }
}

// Accumulates un-averaged gradients for one chunk into `grads`, returns the
// summed cross-entropy.
double backward_chunk(const LstmParams& params, const ChunkCache& cc,
                      std::span<const FlowRegime> labels, const MatrixXd* mask1,
                      const MatrixXd* mask2, LstmParams& grads) {
  const LstmHyper& hp = params.hyper();
  const int H = hp.hidden, B = cc.B, T = cc.T;
  const Eigen::Index BT = Eigen::Index(B) * T;

  double loss_sum = 0.0;
  MatrixXd dlogits = cc.probs;
  for (int b = 0; b < B; ++b) {
    const int cls = regime_code(labels[b]);
    if (cls >= hp.classes) throw InvalidParams("label code exceeds class count");
    loss_sum -= std::log(std::max(cc.probs(cls, b), 1e-300));
    dlogits(cls, b) -= 1.0;
  }

  const auto h_final = cc.layers.back().h.middleCols(Eigen::Index(T - 1) * B, B);

  grads.head_w().noalias() += dlogits * cc.fc2_act.transpose();
  grads.head_b().noalias() += dlogits.rowwise().sum();

  MatrixXd da2 = params.head_w().transpose() * dlogits;
  if (mask2) da2.array() *= mask2->array();
  MatrixXd dz2 = (cc.fc2_pre.array() > 0.0).cast<double>() * da2.array();

  grads.fc2_w().noalias() += dz2 * cc.fc1_act.transpose();
  grads.fc2_b().noalias() += dz2.rowwise().sum();

  MatrixXd da1 = params.fc2_w().transpose() * dz2;
  if (mask1) da1.array() *= mask1->array();
  MatrixXd dz1 = (cc.fc1_pre.array() > 0.0).cast<double>() * da1.array();

  grads.fc1_w().noalias() += dz1 * h_final.transpose();
  grads.fc1_b().noalias() += dz1.rowwise().sum();

  MatrixXd dh_final = params.fc1_w().transpose() * dz1;  // H x B

  // dIn_ext: per-step upstream gradient for the current layer's h outputs;
  // for the top layer only the final step receives one.
  MatrixXd dG(4 * H, BT);
  MatrixXd dIn_ext;
  MatrixXd dh_carry(H, B), dc_carry(H, B);
  MatrixXd dh(H, B), dc(H, B), tc(H, B);

  for (int l = hp.layers - 1; l >= 0; --l) {
    const LayerCache& lc = cc.layers[l];
    const bool top = l == hp.layers - 1;
    dh_carry.setZero();
    dc_carry.setZero();

    const auto wh = params.wh(l);
    for (int t = T - 1; t >= 0; --t) {
      const Eigen::Index col0 = Eigen::Index(t) * B;
      dh = dh_carry;
      if (top) {
        if (t == T - 1) dh += dh_final;
      } else {
        dh += dIn_ext.middleCols(col0, B);
      }

      const auto gi = lc.gates.topRows(H).middleCols(col0, B).array();
      const auto gf = lc.gates.middleRows(H, H).middleCols(col0, B).array();
      const auto gg = lc.gates.middleRows(2 * H, H).middleCols(col0, B).array();
      const auto go = lc.gates.middleRows(3 * H, H).middleCols(col0, B).array();
      const auto c_t = lc.c.middleCols(col0, B).array();

      tc = c_t.tanh().matrix();
      dc = dc_carry;
      dc.array() += dh.array() * go * (1.0 - tc.array().square());

      auto dGi = dG.topRows(H).middleCols(col0, B);
      auto dGf = dG.middleRows(H, H).middleCols(col0, B);
      auto dGg = dG.middleRows(2 * H, H).middleCols(col0, B);
      auto dGo = dG.middleRows(3 * H, H).middleCols(col0, B);

      dGi = (dc.array() * gg * gi * (1.0 - gi)).matrix();
      if (t > 0) {
        const auto c_prev = lc.c.middleCols(col0 - B, B).array();
        dGf = (dc.array() * c_prev * gf * (1.0 - gf)).matrix();
      } else {
        dGf.setZero();
      }
      dGg = (dc.array() * gi * (1.0 - gg.square())).matrix();
      dGo = (dh.array() * tc.array() * go * (1.0 - go)).matrix();

      dh_carry.noalias() = wh.transpose() * dG.middleCols(col0, B);
      dc_carry = (dc.array() * gf).matrix();
    }

    const MatrixXd& in_all = l == 0 ? cc.embed : cc.layers[l - 1].h;
    grads.wx(l).noalias() += dG * in_all.transpose();
    if (T > 1)
      grads.wh(l).noalias() +=
          dG.rightCols(BT - B) * lc.h.leftCols(BT - B).transpose();
    grads.bias(l).noalias() += dG.rowwise().sum();

    dIn_ext.noalias() = params.wx(l).transpose() * dG;  // for the layer below / embedding
  }

  grads.embed_w().noalias() += dIn_ext * cc.x.transpose();
  grads.embed_b().noalias() += dIn_ext.rowwise().sum();

  return loss_sum;
}

MatrixXd draw_mask(Rng& rng, int rows, int cols, double rate) {
  MatrixXd m(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform() < rate ? 0.0 : scale;
  return m;
}

}  // namespace

std::vector<double> forward(const LstmParams& params, const EventWindow& window, bool train_mode,
                            Rng& rng) {
  const LstmHyper& hp = params.hyper();
  const EventWindow* wptr = &window;

  MatrixXd mask1, mask2;
  const bool dropout = train_mode && hp.dropout_rate > 0.0;
  if (dropout) {
    mask1 = draw_mask(rng, hp.fc_dim, 1, hp.dropout_rate);
    mask2 = draw_mask(rng, hp.fc_dim, 1, hp.dropout_rate);
  }

  ChunkCache cc;
  cc.B = 1;
  cc.T = hp.seq_len;
  cc.x.resize(3, hp.seq_len);
  fill_inputs(cc.x, std::span<const EventWindow* const>(&wptr, 1), hp.seq_len);
  forward_chunk(params, cc, dropout ? &mask1 : nullptr, dropout ? &mask2 : nullptr);

  return {cc.probs.data(), cc.probs.data() + hp.classes};
}

LossAndGrad loss_and_grad(const LstmParams& params,
                          std::span<const EventWindow* const> windows,
                          std::span<const FlowRegime> labels, Rng& rng) {
  const LstmHyper& hp = params.hyper();
  if (windows.empty()) throw EmptyDataset("empty batch");
  if (windows.size() != labels.size()) throw InvalidParams("window/label count mismatch");

  const int n = int(windows.size());
  const bool dropout = hp.dropout_rate > 0.0;

  // Per-window dropout masks, drawn up front in window order.
  MatrixXd mask1, mask2;
  if (dropout) {
    mask1.resize(hp.fc_dim, n);
    mask2.resize(hp.fc_dim, n);
    const double scale = 1.0 / (1.0 - hp.dropout_rate);
    for (int b = 0; b < n; ++b) {
      for (int r = 0; r < hp.fc_dim; ++r)
        mask1(r, b) = rng.uniform() < hp.dropout_rate ? 0.0 : scale;
      for (int r = 0; r < hp.fc_dim; ++r)
        mask2(r, b) = rng.uniform() < hp.dropout_rate ? 0.0 : scale;
    }
  }

  LossAndGrad out{0.0, LstmParams(hp)};
  double loss_sum = 0.0;

  for (int start = 0; start < n; start += kChunk) {
    const int B = std::min(kChunk, n - start);
    ChunkCache cc;
    cc.B = B;
    cc.T = hp.seq_len;
    cc.x.resize(3, Eigen::Index(B) * hp.seq_len);
    fill_inputs(cc.x, windows.subspan(start, B), hp.seq_len);

    MatrixXd m1, m2;
    const MatrixXd* m1p = nullptr;
    const MatrixXd* m2p = nullptr;
    if (dropout) {
      m1 = mask1.middleCols(start, B);
      m2 = mask2.middleCols(start, B);
      m1p = &m1;
      m2p = &m2;
    }

    forward_chunk(params, cc, m1p, m2p);
    loss_sum += backward_chunk(params, cc, labels.subspan(start, B), m1p, m2p, out.grads);
  }

  const double inv = 1.0 / double(n);
  out.loss = loss_sum * inv;
  for (double& g : out.grads.flat()) g *= inv;
  return out;
}

LossAndGrad loss_and_grad(const LstmParams& params, std::span<const EventWindow> windows,
                          std::span<const FlowRegime> labels, Rng& rng) {
  std::vector<const EventWindow*> ptrs(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) ptrs[i] = &windows[i];
  return loss_and_grad(params, std::span<const EventWindow* const>(ptrs), labels, rng);
}

void adam_step(LstmParams& params, LstmParams& grads, AdamState& state, double lr,
               double clip_norm) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeMismatch("parameter/gradient/moment sizes differ");

  double norm_sq = 0.0;
  for (double g : grads.flat()) norm_sq += g * g;
  const double norm = std::sqrt(norm_sq);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& g : grads.flat()) g *= scale;
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  double* p = params.flat().data();
  const double* g = grads.flat().data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

namespace {

std::uint64_t window_content_hash(const EventWindow& w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(&w.t_start, sizeof w.t_start);
  mix(&w.t_end, sizeof w.t_end);
  for (const NormalizedEvent& ev : w.events) {
    mix(&ev.xn, sizeof ev.xn);
    mix(&ev.yn, sizeof ev.yn);
    mix(&ev.p, sizeof ev.p);
  }
  return h;
}

}  // namespace

TrainResult train(std::span<const EventWindow> windows, std::span<const FlowRegime> labels,
                  const LstmHyper& hyper, const TrainOptions& opts) {
  hyper.validate();
  if (windows.empty()) throw EmptyDataset("training set is empty");
  if (windows.size() != labels.size()) throw InvalidParams("window/label count mismatch");

  {
    bool seen[kRegimeCount] = {};
    int distinct = 0;
    for (FlowRegime l : labels)
      if (!seen[regime_code(l)]) {
        seen[regime_code(l)] = true;
        ++distinct;
      }
    if (distinct < 2) throw SingleClass("training set covers a single class");
  }

  const std::size_t n = windows.size();

  // Canonical ordering: makes the seeded shuffle independent of the caller's
  // dataset order.
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), 0);
  {
    std::vector<std::uint64_t> hash(n);
    for (std::size_t i = 0; i < n; ++i) hash[i] = window_content_hash(windows[i]);
    std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
      const int ca = regime_code(labels[a]), cb = regime_code(labels[b]);
      if (ca != cb) return ca < cb;
      if (windows[a].t_start != windows[b].t_start) return windows[a].t_start < windows[b].t_start;
      if (windows[a].t_end != windows[b].t_end) return windows[a].t_end < windows[b].t_end;
      return hash[a] < hash[b];
    });
  }

  Rng root(hyper.seed);

  std::vector<std::size_t> train_idx, val_idx;
  if (opts.val_indices) {
    std::vector<bool> is_val(n, false);
    for (std::size_t i : *opts.val_indices) is_val.at(i) = true;
    for (std::size_t i : canon) (is_val[i] ? val_idx : train_idx).push_back(i);
  } else {
    for (int c = 0; c < kRegimeCount; ++c) {
      std::vector<std::size_t> cls;
      for (std::size_t i : canon)
        if (regime_code(labels[i]) == c) cls.push_back(i);
      if (cls.empty()) continue;
      Rng r = root.fork(0x5150 + c);
      for (std::size_t i = cls.size(); i > 1; --i)
        std::swap(cls[i - 1], cls[r.uniform_int(i)]);
      std::size_t n_val = std::size_t(std::llround(opts.val_fraction * double(cls.size())));
      n_val = std::min(n_val, cls.size() - 1);  // keep every class trainable
      val_idx.insert(val_idx.end(), cls.begin(), cls.begin() + n_val);
      train_idx.insert(train_idx.end(), cls.begin() + n_val, cls.end());
    }
  }
  if (train_idx.empty()) throw EmptyDataset("no training samples after split");

  Rng init_rng = root.fork(1);
  TrainResult result{LstmParams::initialized(hyper, init_rng), {}};
  AdamState adam(result.params.size());

  std::vector<const EventWindow*> batch_windows(hyper.batch);
  std::vector<FlowRegime> batch_labels(hyper.batch);

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();

    std::vector<std::size_t> order = train_idx;
    Rng shuffle_rng = root.fork(100 + std::uint64_t(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);

    Rng dropout_rng = root.fork(200 + std::uint64_t(epoch));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t bsz = std::min<std::size_t>(hyper.batch, order.size() - start);
      for (std::size_t i = 0; i < bsz; ++i) {
        batch_windows[i] = &windows[order[start + i]];
        batch_labels[i] = labels[order[start + i]];
      }
      auto lg = loss_and_grad(result.params,
                              std::span<const EventWindow* const>(batch_windows.data(), bsz),
                              std::span<const FlowRegime>(batch_labels.data(), bsz), dropout_rng);
      adam_step(result.params, lg.grads, adam, hyper.lr, hyper.clip_norm);
      loss_sum += lg.loss * double(bsz);
    }

    double val_acc = 0.0;
    if (!val_idx.empty()) {
      InferenceEngine engine(result.params);
      std::size_t correct = 0;
      for (std::size_t i : val_idx) {
        const auto probs = engine.classify(windows[i]);
        const int pred = int(std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (pred == regime_code(labels[i])) ++correct;
      }
      val_acc = double(correct) / double(val_idx.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / double(order.size());
    stats.val_accuracy = val_acc;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    result.history.push_back(stats);
    if (opts.on_epoch) opts.on_epoch(stats);

    if (opts.early_stop_accuracy && !val_idx.empty() && val_acc >= *opts.early_stop_accuracy)
      break;
  }
  return result;
}

std::vector<std::uint8_t> serialize_params(const LstmParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + params.size() * 4);
  out.insert(out.end(), kElsMagic, kElsMagic + 4);
  auto put_u32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
  };
  put_u32(1);  // version
  put_u32(std::uint32_t(params.size()));
  put_u32(0);  // reserved
  for (double d : params.flat()) {
    const float f = float(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  }
  return out;
}

LstmParams deserialize_params(std::span<const std::uint8_t> bytes, const LstmHyper& hyper) {
  if (bytes.size() < 16) throw BadMagic("ELS1: input shorter than header");
  if (std::memcmp(bytes.data(), kElsMagic, 4) != 0) throw BadMagic("ELS1: bad magic");
  auto get_u32 = [&bytes](std::size_t off) {
    return std::uint32_t(bytes[off]) | (std::uint32_t(bytes[off + 1]) << 8) |
           (std::uint32_t(bytes[off + 2]) << 16) | (std::uint32_t(bytes[off + 3]) << 24);
  };
  const std::uint32_t version = get_u32(4);
  if (version != 1) throw UnsupportedVersion("ELS1: unsupported version " + std::to_string(version));

  LstmParams params(hyper);
  const std::uint32_t count = get_u32(8);
  if (count != params.size())
    throw CountMismatch("ELS1: file has " + std::to_string(count) + " parameters, architecture needs " +
                        std::to_string(params.size()));
  if (bytes.size() != 16 + std::size_t(count) * 4)
    throw CountMismatch("ELS1: payload size does not match parameter count");

  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = get_u32(16 + i * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    params.flat()[i] = double(f);
  }
  return params;
}

void save_params(const std::string& path, const LstmParams& params) {
  auto bytes = serialize_params(params);
  write_binary_file(path, bytes);
}

LstmParams load_params(const std::string& path, const LstmHyper& hyper) {
  auto bytes = read_binary_file(path);
  return deserialize_params(bytes, hyper);
}

}  // namespace evf
