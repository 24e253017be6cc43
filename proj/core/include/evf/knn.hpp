#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evf/flow_regime.hpp"

namespace evf {

/// Exhaustive-search k-nearest-neighbors classifier over spectral features.
class KnnModel {
 public:
  /// Builds a model; throws DimensionMismatch / InsufficientTraining /
  /// InvalidParams (k must be a positive odd integer).
  static KnnModel fit(std::vector<std::vector<double>> features,
                      std::vector<FlowRegime> labels, int k = 5);

  struct PredictResult {
    FlowRegime label;
    std::vector<double> neighbor_distances;  // k smallest, ascending
  };

  /// Euclidean vote of the k nearest neighbors; ties broken by smallest
  /// summed distance among tied classes, then lowest class code.
  PredictResult predict(std::span<const double> feature) const;

  int k() const { return k_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }

  // "KNN1" persistence: magic, u32 k, u32 F, u32 n, then n records of
  // F little-endian f64 features + u8 label code.
  std::vector<std::uint8_t> serialize() const;
  static KnnModel deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::string& path) const;
  static KnnModel load(const std::string& path);

 private:
  KnnModel() = default;
  int k_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> features_;  // n * dim, row-major
  std::vector<FlowRegime> labels_;
};

}  // namespace evf
