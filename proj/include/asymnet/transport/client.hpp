#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asymnet/backend/event_builder.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/msg/fragment.hpp"
#include "asymnet/transport/frame.hpp"

namespace asymnet::transport {

struct ClientStats {
  std::uint64_t frames = 0;
  std::uint64_t content_bytes = 0;
  std::uint64_t magic_errors = 0;
  std::uint64_t gaps = 0;
  std::uint64_t lost_frames = 0;
  std::uint64_t events = 0;
  std::uint64_t verified_events = 0;
  std::uint64_t incomplete_events = 0;  // flagged by the builder
  std::uint64_t broken_events = 0;      // damaged by gaps or parse errors at the client
  std::uint64_t fragments = 0;
  std::uint64_t fragment_bytes = 0;
  std::uint64_t crc_errors = 0;
  std::uint64_t provenance_errors = 0;
  std::uint64_t payload_mismatches = 0;
  std::uint64_t missing_fragments = 0;
  std::uint64_t malformed = 0;
  std::uint64_t grants_issued = 0;
  std::array<std::uint64_t, 32> fragment_bytes_by_card{};
  std::uint64_t digest = 0xCBF29CE484222325ull;  // FNV-1a over all frame content
};

struct AssembledEvent {
  msg::EventStamp stamp;
  std::uint32_t active_mask = 0;
  std::uint64_t fragments = 0;
  std::uint64_t fragment_bytes = 0;
  bool incomplete_flag = false;
  bool broken = false;
  bool verified = false;  // every active link delivered every channel bit-exactly
};

using GeneratorTruth = std::array<std::optional<frontend::EventGeneratorConfig>, 32>;

// DAQ client: reassembles events from transport frames, checks CRCs, provenance stamps
// and, when generator truth is known, payloads bit for bit. Also runs the grant policy:
// the next grant goes out when the first frame carrying the latest grant id arrives.
class TransportClient {
 public:
  explicit TransportClient(std::uint32_t credit, GeneratorTruth truth = {}, bool keep_events = true)
      : credit_(credit), truth_(truth), keep_events_(keep_events) {
    if (credit == 0) throw ConfigError("credit must be at least 1");
  }

  CreditGrant initial_grant() {
    ++stats_.grants_issued;
    latest_grant_ = 0;
    return CreditGrant{credit_, latest_grant_};
  }

  // Fallback when no frame arrived for a while: re-issue with a fresh id.
  CreditGrant reissue_grant() {
    ++stats_.grants_issued;
    return CreditGrant{credit_, ++latest_grant_};
  }

  // Processes one received frame; returns a grant to send back, if it is time.
  std::optional<CreditGrant> on_frame(std::span<const std::uint8_t> frame) {
    if (frame.size() < kTransportHeaderBytes) {
      ++stats_.magic_errors;
      return std::nullopt;
    }
    auto h = read_header(frame);
    if (h.magic != kTransportMagic) {
      ++stats_.magic_errors;
      return std::nullopt;
    }
    ++stats_.frames;
    if (expected_seq_ && h.sequence != *expected_seq_) {
      ++stats_.gaps;
      stats_.lost_frames += static_cast<std::uint32_t>(h.sequence - *expected_seq_);
      if (in_event_) {
        mark_broken();
        finish_event(false);  // resync at the next event header
      }
    }
    expected_seq_ = h.sequence + 1;
    auto content = frame.subspan(kTransportHeaderBytes);
    stats_.content_bytes += content.size();
    for (auto b : content) stats_.digest = (stats_.digest ^ b) * 0x100000001B3ull;
    parse_content(content, h);

    if (h.grant_id == latest_grant_) {
      ++stats_.grants_issued;
      return CreditGrant{credit_, ++latest_grant_};
    }
    return std::nullopt;
  }

  const ClientStats& stats() const { return stats_; }
  const std::vector<AssembledEvent>& events() const { return events_; }
  std::uint32_t credit() const { return credit_; }

 private:
  void parse_content(std::span<const std::uint8_t> content, const TransportHeader& h) {
    std::size_t pos = 0;
    while (pos < content.size()) {
      if (content.size() - pos < msg::kPacketOverheadBytes) {
        ++stats_.malformed;
        if (in_event_) mark_broken();
        return;
      }
      auto total = msg::serialized_size_from_header(msg::peek_header(content.subspan(pos)));
      if (pos + total > content.size()) {
        ++stats_.malformed;
        if (in_event_) mark_broken();
        return;
      }
      auto bytes = content.subspan(pos, total);
      pos += total;
      msg::DeserializedPacket d;
      try {
        d = msg::deserialize(bytes);
      } catch (const MalformedInput&) {
        ++stats_.malformed;
        if (in_event_) mark_broken();
        continue;
      }
      if (!d.crc_ok) {
        ++stats_.crc_errors;
        if (in_event_) mark_broken();
        continue;
      }
      handle_packet(d.packet, bytes, h, pos == content.size());
    }
  }

  // The frame's incomplete flag belongs to the event whose global EOE closes the frame.
  void handle_packet(const msg::FragmentPacket& p, std::span<const std::uint8_t> bytes, const TransportHeader& h,
                     bool last_in_frame) {
    if (backend::is_event_header(p)) {
      if (in_event_) {
        mark_broken();
        finish_event(false);
      }
      begin_event(*p.stamp(), backend::event_header_mask(p));
      return;
    }
    if (backend::is_global_eoe(p)) {
      if (!in_event_) return;
      cur_.incomplete_flag = last_in_frame && h.incomplete_event();
      finish_event(true);
      return;
    }
    if (!in_event_) return;  // resyncing
    ++stats_.fragments;
    stats_.fragment_bytes += bytes.size();
    ++cur_.fragments;
    cur_.fragment_bytes += bytes.size();
    check_fragment(p, bytes);
  }

  void begin_event(const msg::EventStamp& s, std::uint32_t mask) {
    in_event_ = true;
    cur_ = AssembledEvent{};
    cur_.stamp = s;
    cur_.active_mask = mask;
    next_channel_.fill(0);
    provenance_ok_ = true;
  }

  void check_fragment(const msg::FragmentPacket& p, std::span<const std::uint8_t> bytes) {
    std::size_t stamp_index = p.soe ? frontend::kFirstPacketExtraWords : 0;
    if (p.payload.size() < stamp_index + frontend::kChannelBlockHeaderWords) {
      provenance_fail();
      return;
    }
    unsigned card = p.payload[stamp_index] >> 11;
    unsigned channel = p.payload[stamp_index] & 0x7FFu;
    if (!((cur_.active_mask >> card) & 1u) || channel < next_channel_[card] ||
        p.payload[stamp_index + 1] != (cur_.stamp.event_number & 0xFFFFu) || p.soe != (channel == 0)) {
      provenance_fail();
      return;
    }
    if (channel > next_channel_[card]) {
      // dropped upstream; count the hole, keep checking the rest
      stats_.missing_fragments += channel - next_channel_[card];
      provenance_ok_ = false;
    }
    next_channel_[card] = channel + 1;
    stats_.fragment_bytes_by_card[card] += bytes.size();
    if (auto& cfg = truth_[card]) {
      frontend::EventId id{static_cast<std::uint8_t>(card), cur_.stamp.event_number, cur_.stamp.timestamp};
      if (channel >= cfg->channels_per_event) {
        provenance_fail();
        return;
      }
      auto expect = msg::serialize(frontend::generate_packet(*cfg, id, channel));
      if (expect.size() != bytes.size() || !std::equal(expect.begin(), expect.end(), bytes.begin())) {
        ++stats_.payload_mismatches;
        provenance_ok_ = false;
      }
    }
  }

  void provenance_fail() {
    ++stats_.provenance_errors;
    provenance_ok_ = false;
  }

  void mark_broken() { cur_.broken = true; }

  void finish_event(bool closed) {
    in_event_ = false;
    ++stats_.events;
    if (cur_.incomplete_flag) ++stats_.incomplete_events;
    bool all_channels = true;
    for (unsigned l = 0; l < 32; ++l) {
      if (!((cur_.active_mask >> l) & 1u)) continue;
      if (auto& cfg = truth_[l]) {
        if (next_channel_[l] != cfg->channels_per_event) {
          stats_.missing_fragments += cfg->channels_per_event - std::min(next_channel_[l], cfg->channels_per_event);
          all_channels = false;
        }
      } else {
        all_channels = false;
      }
    }
    if (!closed || cur_.broken) ++stats_.broken_events;
    cur_.verified = closed && !cur_.broken && !cur_.incomplete_flag && provenance_ok_ && all_channels;
    if (cur_.verified) ++stats_.verified_events;
    if (keep_events_) events_.push_back(cur_);
  }

  std::uint32_t credit_;
  GeneratorTruth truth_;
  bool keep_events_;
  std::uint8_t latest_grant_ = 0;
  std::optional<std::uint32_t> expected_seq_;
  bool in_event_ = false;
  AssembledEvent cur_;
  std::array<unsigned, 32> next_channel_{};
  bool provenance_ok_ = true;
  ClientStats stats_;
  std::vector<AssembledEvent> events_;
};

}  // namespace asymnet::transport
