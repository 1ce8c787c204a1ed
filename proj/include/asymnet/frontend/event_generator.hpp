#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asymnet/msg/fragment.hpp"

namespace asymnet::frontend {

enum class FillPattern { Counter, Prbs, Constant };

inline FillPattern parse_fill_pattern(std::string_view s) {
  if (s == "counter") return FillPattern::Counter;
  if (s == "prbs") return FillPattern::Prbs;
  if (s == "constant") return FillPattern::Constant;
  throw ConfigError("unknown fill pattern: " + std::string(s));
}

inline const char* to_string(FillPattern p) {
  switch (p) {
    case FillPattern::Counter: return "counter";
    case FillPattern::Prbs: return "prbs";
    case FillPattern::Constant: return "constant";
  }
  return "?";
}

// Per-channel block: stamp (card_id << 11 | channel), low 16 bits of the event number,
// then `words_per_channel` samples. The first packet of an event additionally starts
// with the SOE header (event number, timestamp) and a channel-count word.
inline constexpr std::size_t kChannelBlockHeaderWords = 2;
inline constexpr std::size_t kFirstPacketExtraWords = msg::kSoeHeaderWords + 1;
inline constexpr std::size_t kMaxWordsPerChannel =
    msg::kMaxPayloadBytes / 2 - kFirstPacketExtraWords - kChannelBlockHeaderWords;
static_assert(kMaxWordsPerChannel == 1012);
inline constexpr unsigned kMaxChannelsPerEvent = 2048;

struct EventGeneratorConfig {
  unsigned channels_per_event = 256;
  std::size_t words_per_channel = 512;
  FillPattern fill_pattern = FillPattern::Counter;
  std::uint16_t constant_value = 0xA5A5;

  void validate() const {
    if (channels_per_event == 0 || channels_per_event > kMaxChannelsPerEvent)
      throw ConfigError("channels_per_event must be 1..2048");
    if (words_per_channel % 2 != 0) throw ConfigError("words_per_channel must be even");
    if (words_per_channel > kMaxWordsPerChannel) throw ConfigError("words_per_channel exceeds one packet");
  }

  std::size_t packet_payload_words(unsigned channel) const {
    return (channel == 0 ? kFirstPacketExtraWords : 0) + kChannelBlockHeaderWords + words_per_channel;
  }
  std::size_t packet_bytes(unsigned channel) const {
    return msg::kPacketOverheadBytes + 2 * packet_payload_words(channel);
  }
  std::size_t event_bytes() const {
    std::size_t total = 0;
    for (unsigned c = 0; c < channels_per_event; ++c) total += packet_bytes(c);
    return total;
  }
};

struct EventId {
  std::uint8_t card_id = 0;
  std::uint32_t event_number = 0;
  std::uint64_t timestamp = 0;
  bool operator==(const EventId&) const = default;
};

inline std::uint16_t channel_stamp(std::uint8_t card_id, unsigned channel) {
  return static_cast<std::uint16_t>((unsigned{card_id} << 11) | (channel & 0x7FFu));
}

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}
}  // namespace detail

// Sample words of one channel; a pure function of (config, event, channel), which is
// what lets the DAQ client check payloads without a copy of the data.
inline void generate_samples(const EventGeneratorConfig& cfg, const EventId& ev, unsigned channel,
                             std::vector<std::uint16_t>& out) {
  switch (cfg.fill_pattern) {
    case FillPattern::Counter: {
      auto base = static_cast<std::uint16_t>(ev.event_number * 7u + channel * 131u + ev.card_id * 8191u);
      for (std::size_t k = 0; k < cfg.words_per_channel; ++k) out.push_back(static_cast<std::uint16_t>(base + k));
      break;
    }
    case FillPattern::Prbs: {
      // x^15 + x^14 + 1 LFSR, seeded per (card, event, channel), 16 bits per word.
      auto s = static_cast<std::uint32_t>(
          detail::mix64((std::uint64_t{ev.card_id} << 48) ^ (std::uint64_t{ev.event_number} << 16) ^ channel) &
          0x7FFFu);
      if (s == 0) s = 1;
      for (std::size_t k = 0; k < cfg.words_per_channel; ++k) {
        std::uint16_t w = 0;
        for (int b = 0; b < 16; ++b) {
          std::uint32_t bit = ((s >> 14) ^ (s >> 13)) & 1u;
          s = ((s << 1) | bit) & 0x7FFFu;
          w = static_cast<std::uint16_t>((w << 1) | bit);
        }
        out.push_back(w);
      }
      break;
    }
    case FillPattern::Constant:
      out.insert(out.end(), cfg.words_per_channel, cfg.constant_value);
      break;
  }
}

// Payload words of packet `channel` (without the CRC framing).
inline std::vector<std::uint16_t> channel_block(const EventGeneratorConfig& cfg, const EventId& ev,
                                                unsigned channel) {
  std::vector<std::uint16_t> w;
  w.reserve(kChannelBlockHeaderWords + cfg.words_per_channel + 1);
  if (channel == 0) w.push_back(static_cast<std::uint16_t>(cfg.channels_per_event));
  w.push_back(channel_stamp(ev.card_id, channel));
  w.push_back(static_cast<std::uint16_t>(ev.event_number & 0xFFFFu));
  generate_samples(cfg, ev, channel, w);
  return w;
}

// One packet per channel: channel 0 is SOE, the last channel EOE.
inline msg::FragmentPacket generate_packet(const EventGeneratorConfig& cfg, const EventId& ev, unsigned channel) {
  if (channel >= cfg.channels_per_event) throw MalformedInput("generate_packet: channel out of range");
  bool soe = channel == 0;
  bool eoe = channel + 1 == cfg.channels_per_event;
  std::optional<msg::EventStamp> stamp;
  if (soe) stamp = msg::EventStamp{ev.event_number, ev.timestamp};
  return msg::build_fragment_packet(soe, eoe, channel_block(cfg, ev, channel), stamp);
}

inline std::vector<msg::FragmentPacket> generate_event(const EventGeneratorConfig& cfg, const EventId& ev) {
  std::vector<msg::FragmentPacket> out;
  out.reserve(cfg.channels_per_event);
  for (unsigned c = 0; c < cfg.channels_per_event; ++c) out.push_back(generate_packet(cfg, ev, c));
  return out;
}

}  // namespace asymnet::frontend
