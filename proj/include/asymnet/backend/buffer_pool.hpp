#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "asymnet/core/errors.hpp"

namespace asymnet::backend {

// Bounded single-producer/single-consumer ring. One slot is kept empty.
template <class T>
class SpscRing {
 public:
  explicit SpscRing(std::size_t capacity) : slots_(capacity + 1) {}

  bool push(const T& v) {
    auto t = tail_.load(std::memory_order_relaxed);
    auto next = (t + 1) % slots_.size();
    if (next == head_.load(std::memory_order_acquire)) return false;
    slots_[t] = v;
    tail_.store(next, std::memory_order_release);
    return true;
  }

  std::optional<T> pop() {
    auto h = head_.load(std::memory_order_relaxed);
    if (h == tail_.load(std::memory_order_acquire)) return std::nullopt;
    T v = slots_[h];
    head_.store((h + 1) % slots_.size(), std::memory_order_release);
    return v;
  }

  const T* peek() const {
    auto h = head_.load(std::memory_order_relaxed);
    if (h == tail_.load(std::memory_order_acquire)) return nullptr;
    return &slots_[h];
  }

  std::size_t size() const {
    auto h = head_.load(std::memory_order_acquire);
    auto t = tail_.load(std::memory_order_acquire);
    return (t + slots_.size() - h) % slots_.size();
  }
  bool empty() const { return size() == 0; }
  std::size_t capacity() const { return slots_.size() - 1; }

 private:
  std::vector<T> slots_;
  alignas(64) std::atomic<std::size_t> head_{0};
  alignas(64) std::atomic<std::size_t> tail_{0};
};

inline constexpr std::size_t kDefaultBufferBytes = 8192;
inline constexpr std::size_t kDefaultHeaderReserve = 64;
inline constexpr std::size_t kDefaultPoolSize = 64;

struct BufferFlags {
  bool incomplete_event = false;
  bool last_of_event = false;
  bool operator==(const BufferFlags&) const = default;
};

// Handle to one pooled buffer. Content occupies [header_reserve, header_reserve + fill).
struct BufferDescriptor {
  std::uint32_t buffer_id = 0;
  std::size_t fill_level = 0;
  BufferFlags flags;
  std::uint32_t event_number = 0;  // event whose data the buffer holds
};

struct PoolConfig {
  std::size_t buffer_bytes = kDefaultBufferBytes;
  std::size_t header_reserve = kDefaultHeaderReserve;
  std::size_t pool_size = kDefaultPoolSize;
};

// Fixed set of buffers. Free descriptors wait in O_FIFO, filled ones in I_FIFO; the
// mover and the transport hold at most one each in between.
class BufferPool {
 public:
  explicit BufferPool(PoolConfig cfg = {})
      : cfg_(cfg), storage_(cfg.pool_size), o_fifo_(cfg.pool_size), i_fifo_(cfg.pool_size) {
    if (cfg.pool_size == 0) throw ConfigError("buffer pool must hold at least one descriptor");
    if (cfg.header_reserve >= cfg.buffer_bytes) throw ConfigError("header reserve exceeds buffer size");
    for (std::uint32_t i = 0; i < cfg.pool_size; ++i) {
      storage_[i].resize(cfg.buffer_bytes);
      o_fifo_.push(BufferDescriptor{i, 0, {}, 0});
    }
  }

  const PoolConfig& config() const { return cfg_; }
  std::size_t content_capacity() const { return cfg_.buffer_bytes - cfg_.header_reserve; }

  std::uint8_t* data(std::uint32_t id) { return storage_.at(id).data(); }
  const std::uint8_t* data(std::uint32_t id) const { return storage_.at(id).data(); }
  std::uint8_t* content(std::uint32_t id) { return data(id) + cfg_.header_reserve; }
  const std::uint8_t* content(std::uint32_t id) const { return data(id) + cfg_.header_reserve; }

  SpscRing<BufferDescriptor>& free_fifo() { return o_fifo_; }
  SpscRing<BufferDescriptor>& filled_fifo() { return i_fifo_; }
  const SpscRing<BufferDescriptor>& free_fifo() const { return o_fifo_; }
  const SpscRing<BufferDescriptor>& filled_fifo() const { return i_fifo_; }

  // Returns a sent or discarded descriptor to the free pool.
  void release(BufferDescriptor d) {
    d.fill_level = 0;
    d.flags = {};
    if (!o_fifo_.push(d)) throw Error("buffer pool: free FIFO overflow (descriptor returned twice)");
  }

 private:
  PoolConfig cfg_;
  std::vector<std::vector<std::uint8_t>> storage_;
  SpscRing<BufferDescriptor> o_fifo_;
  SpscRing<BufferDescriptor> i_fifo_;
};

}  // namespace asymnet::backend
