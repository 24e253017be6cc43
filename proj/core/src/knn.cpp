#include "evf/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "evf/errors.hpp"
#include "evf/event_codec.hpp"

namespace evf {

namespace {
constexpr std::uint8_t kKnnMagic[4] = {0x4b, 0x4e, 0x4e, 0x31};  // "KNN1"

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t((bits >> (8 * i)) & 0xff));
}
double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace

KnnModel KnnModel::fit(std::vector<std::vector<double>> features, std::vector<FlowRegime> labels,
                       int k) {
  if (k < 1 || k % 2 == 0) throw InvalidParams("k must be a positive odd integer");
  if (features.size() != labels.size())
    throw DimensionMismatch("feature and label counts differ");
  if (features.size() < std::size_t(k))
    throw InsufficientTraining("need at least k training samples");

  KnnModel m;
  m.k_ = k;
  m.dim_ = features.front().size();
  if (m.dim_ == 0) throw DimensionMismatch("features must be non-empty");
  m.features_.reserve(features.size() * m.dim_);
  for (const auto& f : features) {
    if (f.size() != m.dim_) throw DimensionMismatch("inconsistent feature dimensions");
    m.features_.insert(m.features_.end(), f.begin(), f.end());
  }
  m.labels_ = std::move(labels);
  return m;
}

KnnModel::PredictResult KnnModel::predict(std::span<const double> feature) const {
  if (feature.size() != dim_)
    throw DimensionMismatch("query dimension " + std::to_string(feature.size()) +
                            " != model dimension " + std::to_string(dim_));

  const std::size_t n = labels_.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = features_.data() + i * dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double d = row[j] - feature[j];
      s += d * d;
    }
    dist[i] = {s, i};
  }

  const std::size_t k = std::size_t(k_);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  int votes[kRegimeCount] = {};
  double summed[kRegimeCount] = {};
  for (std::size_t i = 0; i < k; ++i) {
    const int c = regime_code(labels_[dist[i].second]);
    ++votes[c];
    summed[c] += std::sqrt(dist[i].first);
  }

  int best = -1;
  for (int c = 0; c < kRegimeCount; ++c) {
    if (votes[c] == 0) continue;
    if (best < 0 || votes[c] > votes[best] ||
        (votes[c] == votes[best] && summed[c] < summed[best]))
      best = c;
  }

  PredictResult out;
  out.label = regime_from_code(best);
  out.neighbor_distances.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.neighbor_distances.push_back(std::sqrt(dist[i].first));
  return out;
}

std::vector<std::uint8_t> KnnModel::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(16 + labels_.size() * (dim_ * 8 + 1));
  out.insert(out.end(), kKnnMagic, kKnnMagic + 4);
  put_u32(out, std::uint32_t(k_));
  put_u32(out, std::uint32_t(dim_));
  put_u32(out, std::uint32_t(labels_.size()));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = 0; j < dim_; ++j) put_f64(out, features_[i * dim_ + j]);
    out.push_back(std::uint8_t(regime_code(labels_[i])));
  }
  return out;
}

KnnModel KnnModel::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw TruncatedRecord("KNN1: input shorter than header");
  if (std::memcmp(bytes.data(), kKnnMagic, 4) != 0) throw BadMagic("KNN1: bad magic");
  KnnModel m;
  m.k_ = int(get_u32(bytes.data() + 4));
  m.dim_ = get_u32(bytes.data() + 8);
  const std::size_t n = get_u32(bytes.data() + 12);
  const std::size_t record = m.dim_ * 8 + 1;
  if (bytes.size() != 16 + n * record) throw TruncatedRecord("KNN1: payload size mismatch");
  m.features_.resize(n * m.dim_);
  m.labels_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + 16 + i * record;
    for (std::size_t j = 0; j < m.dim_; ++j) m.features_[i * m.dim_ + j] = get_f64(rec + j * 8);
    m.labels_.push_back(regime_from_code(rec[m.dim_ * 8]));
  }
  return m;
}

void KnnModel::save(const std::string& path) const {
  auto bytes = serialize();
  write_binary_file(path, bytes);
}

KnnModel KnnModel::load(const std::string& path) {
  auto bytes = read_binary_file(path);
  return deserialize(bytes);
}

}  // namespace evf
