#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>

#include "asymnet/backend/buffer_pool.hpp"

namespace asymnet::backend {

struct MoverStats {
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t buffers_filled = 0;
  std::uint64_t stalls = 0;
};

// Places packets into pooled buffers, never splitting one across two buffers. The fit
// check happens before any byte is copied.
class PacketMover {
 public:
  explicit PacketMover(BufferPool& pool) : pool_(pool) {}

  // True if `bytes` can be written now without stalling.
  bool can_accept(std::size_t bytes) const {
    if (bytes > pool_.content_capacity()) return false;
    if (current_ && current_->fill_level + bytes <= pool_.content_capacity()) return true;
    return !pool_.free_fifo().empty();
  }

  // Appends one packet; returns false (and changes nothing) if the pool is exhausted.
  bool write(std::span<const std::uint8_t> packet, std::uint32_t event_number) {
    if (packet.size() > pool_.content_capacity()) throw MalformedInput("packet mover: packet larger than a buffer");
    if (!can_accept(packet.size())) {
      ++stats_.stalls;
      return false;
    }
    if (current_ && current_->fill_level + packet.size() > pool_.content_capacity()) push_current({});
    if (!current_) current_ = *pool_.free_fifo().pop();
    if (current_->fill_level == 0) current_->event_number = event_number;
    std::memcpy(pool_.content(current_->buffer_id) + current_->fill_level, packet.data(), packet.size());
    current_->fill_level += packet.size();
    ++stats_.packets;
    stats_.bytes += packet.size();
    return true;
  }

  // Hands the current buffer to I_FIFO with the given flags; fetches an empty one first
  // if none is held. Returns false when the pool is exhausted.
  bool flush(BufferFlags flags) {
    if (!current_) {
      if (pool_.free_fifo().empty()) return false;
      current_ = *pool_.free_fifo().pop();
    }
    push_current(flags);
    return true;
  }

  // An event ended inside the current buffer.
  void note_event_end() {
    if (current_) current_->flags.last_of_event = true;
  }

  bool holding() const { return current_.has_value(); }
  std::size_t current_fill() const { return current_ ? current_->fill_level : 0; }
  const MoverStats& stats() const { return stats_; }

 private:
  void push_current(BufferFlags flags) {
    current_->flags.incomplete_event |= flags.incomplete_event;
    current_->flags.last_of_event |= flags.last_of_event;
    pool_.filled_fifo().push(*current_);
    current_.reset();
    ++stats_.buffers_filled;
  }

  BufferPool& pool_;
  std::optional<BufferDescriptor> current_;
  MoverStats stats_;
};

}  // namespace asymnet::backend
