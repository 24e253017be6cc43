#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <utility>

namespace evf {

/// Capacity-1 latest-wins handoff slot. A push onto an unconsumed item
/// replaces it; the replaced count makes drops observable. Single producer,
/// single consumer.
template <typename T>
class LatestSlot {
 public:
  /// Returns true when an unconsumed item was replaced.
  bool push(T value) {
    bool replaced;
    {
      std::lock_guard lock(mu_);
      replaced = item_.has_value();
      if (replaced) ++replaced_;
      item_ = std::move(value);
    }
    cv_.notify_one();
    return replaced;
  }

  /// Blocks until an item or closure; nullopt only after close() with an
  /// empty slot.
  std::optional<T> pop_wait() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return item_.has_value() || closed_; });
    if (!item_.has_value()) return std::nullopt;
    std::optional<T> out = std::move(item_);
    item_.reset();
    return out;
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mu_);
    if (!item_.has_value()) return std::nullopt;
    std::optional<T> out = std::move(item_);
    item_.reset();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool has_pending() const {
    std::lock_guard lock(mu_);
    return item_.has_value();
  }

  std::uint64_t replaced_count() const {
    std::lock_guard lock(mu_);
    return replaced_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<T> item_;
  std::uint64_t replaced_ = 0;
  bool closed_ = false;
};

/// Bounded FIFO that drops its oldest element on overflow, so a slow
/// consumer can never stall the producer. Single producer, single consumer.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  /// Returns true when an oldest element was evicted to make room.
  bool push(T value) {
    bool dropped = false;
    {
      std::lock_guard lock(mu_);
      if (items_.size() == capacity_) {
        items_.pop_front();
        ++dropped_;
        dropped = true;
      }
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
    return dropped;
  }

  std::optional<T> pop_wait() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T out = std::move(items_.front());
    items_.pop_front();
    return out;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::uint64_t dropped_count() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

}  // namespace evf
