#pragma once

#include <cstdint>

#include "asymnet/msg/framing.hpp"

namespace asymnet::msg {

inline constexpr std::size_t kChannelCRequestBits = 42;
inline constexpr std::uint8_t kOpSendNextPacket = 0x01;

// Data request: OPCODE(8) then a unary 32-bit target mask (bit i addresses front-end i).
// The mask is sent MSB (front-end 31) first.
struct ChannelCRequest {
  std::uint8_t opcode = kOpSendNextPacket;
  std::uint32_t target_mask = 0;

  bool targets(unsigned id) const { return id < 32 && ((target_mask >> id) & 1u); }
  bool operator==(const ChannelCRequest&) const = default;
};

inline BitStream encode_channel_c_request(const ChannelCRequest& r) {
  if (r.target_mask == 0) throw MalformedInput("channel C: empty target mask");
  std::uint64_t p = (std::uint64_t{r.opcode} << 32) | r.target_mask;
  return detail::frame_payload(p, 40);
}

inline Decoded<ChannelCRequest> decode_channel_c_request(BitView bits) {
  Decoded<ChannelCRequest> d;
  auto p = detail::unframe_payload(bits, 40, d.parity_ok);
  d.msg.opcode = static_cast<std::uint8_t>((p >> 32) & 0xFFu);
  d.msg.target_mask = static_cast<std::uint32_t>(p & 0xFFFFFFFFu);
  return d;
}

}  // namespace asymnet::msg
