#pragma once

#include <cstddef>
#include <optional>

#include "asymnet/core/bits.hpp"
#include "asymnet/msg/fragment.hpp"

namespace asymnet::msg {

struct ParsedFrame {
  BitStream bits;         // including the start bit
  bool oversize = false;  // fragment header announced more than 2048 bytes
};

// Delimits frames in one virtual-channel bit stream. Idle is 0; a 1 starts a frame.
// Fixed-length mode is used for trigger, register and request frames; fragment mode
// reads the size field of the header word. After an oversize header the parser
// discards bits until the channel has been idle for 64 bits.
class FrameParser {
 public:
  static FrameParser fixed(std::size_t frame_bits) { return FrameParser(frame_bits); }
  static FrameParser fragments() { return FrameParser(0); }

  std::optional<ParsedFrame> push(Bit b) {
    if (discarding_) {
      zeros_ = b ? 0 : zeros_ + 1;
      if (zeros_ >= 64) discarding_ = false;
      return std::nullopt;
    }
    if (cur_.empty()) {
      if (!b) return std::nullopt;
      expected_ = fixed_bits_ ? fixed_bits_ : 17;
    }
    cur_.push_back(b);
    if (!fixed_bits_ && cur_.size() == 17) {
      std::size_t pos = 1;
      auto header = static_cast<std::uint16_t>(read_bits(cur_, pos, 16));
      auto total = serialized_size_from_header(header);
      if (total > kMaxPacketBytes) {
        ParsedFrame f{std::move(cur_), true};
        cur_.clear();
        discarding_ = true;
        zeros_ = 0;
        return f;
      }
      expected_ = 1 + total * 8;
    }
    if (cur_.size() == expected_) {
      ParsedFrame f{std::move(cur_), false};
      cur_.clear();
      return f;
    }
    return std::nullopt;
  }

  void reset() {
    cur_.clear();
    discarding_ = false;
    zeros_ = 0;
  }

  bool in_frame() const { return !cur_.empty(); }

 private:
  explicit FrameParser(std::size_t fixed_bits) : fixed_bits_(fixed_bits) {}

  std::size_t fixed_bits_;
  std::size_t expected_ = 0;
  BitStream cur_;
  bool discarding_ = false;
  std::size_t zeros_ = 0;
};

}  // namespace asymnet::msg
