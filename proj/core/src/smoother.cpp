#include "evf/smoother.hpp"

#include <cmath>

#include "evf/errors.hpp"

namespace evf {

Smoother::Smoother(int window) {
  if (window < 1) throw InvalidParams("smoother window must be >= 1");
  ring_.resize(std::size_t(window));
}

FlowRegime Smoother::push(FlowRegime raw) {
  if (count_ == ring_.size()) {
    --counts_[regime_code(ring_[head_])];  // evict oldest
  } else {
    ++count_;
  }
  ring_[head_] = raw;
  head_ = (head_ + 1) % ring_.size();
  ++counts_[regime_code(raw)];
  last_push_[regime_code(raw)] = ++push_seq_;

  int best = -1;
  for (int c = 0; c < kRegimeCount; ++c) {
    if (counts_[c] == 0) continue;
    if (best < 0 || counts_[c] > counts_[best] ||
        (counts_[c] == counts_[best] && last_push_[c] > last_push_[best]))
      best = c;
  }
  return regime_from_code(best);
}

std::array<double, kRegimeCount> Smoother::proportions() const {
  std::array<double, kRegimeCount> out{};
  if (count_ == 0) return out;
  for (int c = 0; c < kRegimeCount; ++c) out[c] = double(counts_[c]) / double(count_);
  return out;
}

double Smoother::vote_fraction(FlowRegime label) const {
  if (count_ == 0) return 0.0;
  return double(counts_[regime_code(label)]) / double(count_);
}

double predictive_entropy(std::span<const double> probabilities) {
  double sum = 0.0;
  for (double p : probabilities) {
    if (p < 0.0) throw InvalidDistribution("negative probability entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace evf
