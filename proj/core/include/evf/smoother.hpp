#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "evf/flow_regime.hpp"

namespace evf {

/// Majority-vote smoother over the last W raw labels. Ties go to the class
/// pushed most recently among the tied set, then to the lowest class code.
class Smoother {
 public:
  explicit Smoother(int window = 150);

  /// Inserts a raw label (evicting the oldest when full) and returns the
  /// majority of the current buffer.
  FlowRegime push(FlowRegime raw);

  /// Per-class fraction of the buffer; all zeros while empty.
  std::array<double, kRegimeCount> proportions() const;

  /// Fraction of buffered labels equal to `label`.
  double vote_fraction(FlowRegime label) const;

  int size() const { return int(count_); }
  int capacity() const { return int(ring_.size()); }

 private:
  std::vector<FlowRegime> ring_;
  std::size_t head_ = 0;   // next write position
  std::size_t count_ = 0;  // buffered labels, <= capacity
  std::array<int, kRegimeCount> counts_{};
  std::array<std::uint64_t, kRegimeCount> last_push_{};
  std::uint64_t push_seq_ = 0;
};

/// -sum p ln p in nats with 0 ln 0 := 0. Throws InvalidDistribution when an
/// entry is negative or the sum deviates from 1 by more than 1e-6.
double predictive_entropy(std::span<const double> probabilities);

}  // namespace evf
