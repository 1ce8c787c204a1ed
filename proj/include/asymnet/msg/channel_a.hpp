#pragma once

#include <cstdint>

#include "asymnet/msg/framing.hpp"

namespace asymnet::msg {

inline constexpr std::size_t kChannelAFrameBits = 10;

// Back-end to front-end trigger word. Payload order, MSB first:
// SAMPLING_STOP, EVENT_TYPE[1:0], SAMPLING_START, CLR_EVENT_CNT, CLR_TIMESTAMP,
// SYNC_SAMPLING_CLK, spare (0).
struct ChannelAMessageDown {
  bool sampling_stop = false;
  std::uint8_t event_type = 0;
  bool sampling_start = false;
  bool clear_event_counter = false;
  bool clear_timestamp = false;
  bool sync_sampling_clock = false;

  bool operator==(const ChannelAMessageDown&) const = default;

  static ChannelAMessageDown trigger(std::uint8_t type) {
    ChannelAMessageDown m;
    m.sampling_stop = true;
    m.event_type = type;
    return m;
  }
};

// Front-end to back-end: SET_BUSY, CLEAR_BUSY, TRIGGER_PRIMITIVES[3:0], 2 spare (0).
struct ChannelAMessageUp {
  bool set_busy = false;
  bool clear_busy = false;
  std::uint8_t trigger_primitives = 0;

  bool operator==(const ChannelAMessageUp&) const = default;
};


inline BitStream encode_channel_a(const ChannelAMessageDown& m) {
  if (m.event_type > 3) throw MalformedInput("channel A: event_type is a 2-bit code");
  if (m.sampling_stop && m.sampling_start) throw MalformedInput("channel A: sampling_stop and sampling_start both set");
  std::uint32_t p = 0;
  p |= std::uint32_t{m.sampling_stop} << 7;
  p |= std::uint32_t{m.event_type} << 5;
  p |= std::uint32_t{m.sampling_start} << 4;
  p |= std::uint32_t{m.clear_event_counter} << 3;
  p |= std::uint32_t{m.clear_timestamp} << 2;
  p |= std::uint32_t{m.sync_sampling_clock} << 1;
  return detail::frame_payload(p, 8);
}

inline Decoded<ChannelAMessageDown> decode_channel_a_down(BitView bits) {
  Decoded<ChannelAMessageDown> d;
  auto p = detail::unframe_payload(bits, 8, d.parity_ok);
  d.msg.sampling_stop = (p >> 7) & 1u;
  d.msg.event_type = static_cast<std::uint8_t>((p >> 5) & 3u);
  d.msg.sampling_start = (p >> 4) & 1u;
  d.msg.clear_event_counter = (p >> 3) & 1u;
  d.msg.clear_timestamp = (p >> 2) & 1u;
  d.msg.sync_sampling_clock = (p >> 1) & 1u;
  return d;
}

inline BitStream encode_channel_a(const ChannelAMessageUp& m) {
  if (m.set_busy && m.clear_busy) throw MalformedInput("channel A: set_busy and clear_busy both set");
  if (m.trigger_primitives > 0xF) throw MalformedInput("channel A: trigger primitives are 4 bits");
  std::uint32_t p = 0;
  p |= std::uint32_t{m.set_busy} << 7;
  p |= std::uint32_t{m.clear_busy} << 6;
  p |= std::uint32_t{m.trigger_primitives} << 2;
  return detail::frame_payload(p, 8);
}

inline Decoded<ChannelAMessageUp> decode_channel_a_up(BitView bits) {
  Decoded<ChannelAMessageUp> d;
  auto p = detail::unframe_payload(bits, 8, d.parity_ok);
  d.msg.set_busy = (p >> 7) & 1u;
  d.msg.clear_busy = (p >> 6) & 1u;
  d.msg.trigger_primitives = static_cast<std::uint8_t>((p >> 2) & 0xFu);
  return d;
}

}  // namespace asymnet::msg
