#pragma once

#include <array>
#include <deque>
#include <optional>

#include "asymnet/core/bits.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::backend {

// Outbound frame queues of the fanout transmitter, one per virtual channel. A full
// queue refuses new frames so callers retry; nothing is dropped.
class FanoutQueues {
 public:
  explicit FanoutQueues(std::size_t depth = 64) : depth_(depth) {}

  bool submit(wire::Channel ch, BitStream frame) {
    auto& q = q_[static_cast<int>(ch)];
    if (q.size() >= depth_) {
      ++refused_;
      return false;
    }
    q.push_back(std::move(frame));
    return true;
  }

  std::optional<BitStream> pop(wire::Channel ch) {
    auto& q = q_[static_cast<int>(ch)];
    if (q.empty()) return std::nullopt;
    auto f = std::move(q.front());
    q.pop_front();
    return f;
  }

  bool empty(wire::Channel ch) const { return q_[static_cast<int>(ch)].empty(); }
  std::size_t size(wire::Channel ch) const { return q_[static_cast<int>(ch)].size(); }
  bool full(wire::Channel ch) const { return size(ch) >= depth_; }
  std::uint64_t refused() const { return refused_; }

 private:
  std::size_t depth_;
  std::array<std::deque<BitStream>, 3> q_;
  std::uint64_t refused_ = 0;
};

}  // namespace asymnet::backend
