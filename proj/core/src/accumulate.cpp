#include "evf/accumulate.hpp"

#include <algorithm>
#include <cstring>

#include "evf/errors.hpp"
#include "evf/event_codec.hpp"

namespace evf {

namespace {
constexpr std::uint8_t kAcfMagic[4] = {0x41, 0x43, 0x46, 0x31};  // "ACF1"

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xff));
  out.push_back(std::uint8_t(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}
std::uint16_t get_u16(const std::uint8_t* p) { return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8)); }
std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
}  // namespace

Accumulator::Accumulator(std::uint64_t count_threshold, AccumMode mode, int width, int height)
    : threshold_(count_threshold), mode_(mode), width_(width), height_(height) {
  if (count_threshold == 0) throw InvalidParams("count threshold must be >= 1");
  if (width <= 0 || height <= 0) throw InvalidParams("accumulation dims must be positive");
  reset_frame();
}

void Accumulator::reset_frame() {
  current_ = AccumFrame{};
  current_.width = width_;
  current_.height = height_;
  current_.channels = mode_ == AccumMode::Signed ? 1 : 2;
  current_.grid.assign(std::size_t(current_.channels) * width_ * height_, 0);
  pending_ = 0;
}

std::optional<AccumFrame> Accumulator::push(const Event& e) {
  if (e.x >= width_ || e.y >= height_)
    throw OutOfBounds("event (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                      ") outside " + std::to_string(width_) + "x" + std::to_string(height_));
  if (pending_ == 0) t_first_ = e.t;
  t_last_ = e.t;

  const std::size_t idx = std::size_t(e.y) * width_ + e.x;
  if (mode_ == AccumMode::Signed) {
    current_.grid[idx] += e.p;
  } else {
    const std::size_t ch = e.p > 0 ? 0 : 1;
    ++current_.grid[ch * std::size_t(width_) * height_ + idx];
  }
  ++pending_;

  if (pending_ < threshold_) return std::nullopt;
  current_.event_count = pending_;
  current_.t_start_us = t_first_;
  current_.delta_t_us = t_last_ - t_first_;
  AccumFrame done = std::move(current_);
  reset_frame();
  return done;
}

std::vector<AccumFrame> accumulate(std::span<const Event> events, std::uint64_t count_threshold,
                                   AccumMode mode, int width, int height) {
  Accumulator acc(count_threshold, mode, width, height);
  std::vector<AccumFrame> out;
  for (const Event& e : events)
    if (auto f = acc.push(e)) out.push_back(std::move(*f));
  return out;
}

std::vector<std::uint8_t> render_accum(const AccumFrame& frame) {
  std::vector<std::uint8_t> img(std::size_t(frame.width) * frame.height);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      long v = 128 + 32L * frame.signed_at(y, x);
      img[std::size_t(y) * frame.width + x] = std::uint8_t(std::clamp(v, 0L, 255L));
    }
  return img;
}

std::vector<std::uint8_t> encode_acf(const AccumFrame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(18 + frame.grid.size() * 4);
  out.insert(out.end(), kAcfMagic, kAcfMagic + 4);
  put_u16(out, std::uint16_t(frame.width));
  put_u16(out, std::uint16_t(frame.height));
  put_u16(out, std::uint16_t(frame.channels));
  put_u32(out, std::uint32_t(frame.event_count));
  put_u32(out, std::uint32_t(frame.delta_t_us));
  for (std::int32_t v : frame.grid) put_u32(out, std::uint32_t(v));
  return out;
}

AccumFrame decode_acf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 18) throw TruncatedRecord("ACF1: input shorter than header");
  if (std::memcmp(bytes.data(), kAcfMagic, 4) != 0) throw BadMagic("ACF1: bad magic");
  AccumFrame f;
  f.width = get_u16(bytes.data() + 4);
  f.height = get_u16(bytes.data() + 6);
  f.channels = get_u16(bytes.data() + 8);
  f.event_count = get_u32(bytes.data() + 10);
  f.delta_t_us = get_u32(bytes.data() + 14);
  if (f.width <= 0 || f.height <= 0 || (f.channels != 1 && f.channels != 2))
    throw TruncatedRecord("ACF1: invalid geometry");
  const std::size_t cells = std::size_t(f.channels) * f.width * f.height;
  if (bytes.size() != 18 + cells * 4) throw TruncatedRecord("ACF1: payload size mismatch");
  f.grid.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
    f.grid[i] = std::int32_t(get_u32(bytes.data() + 18 + i * 4));
  return f;
}

void write_acf_file(const std::string& path, const AccumFrame& frame) {
  auto bytes = encode_acf(frame);
  write_binary_file(path, bytes);
}

AccumFrame read_acf_file(const std::string& path) {
  auto bytes = read_binary_file(path);
  return decode_acf(bytes);
}

}  // namespace evf
