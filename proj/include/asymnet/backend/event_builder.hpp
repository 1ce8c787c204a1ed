#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "asymnet/backend/data_pump.hpp"
#include "asymnet/backend/packet_mover.hpp"
#include "asymnet/msg/fragment.hpp"

namespace asymnet::backend {

inline constexpr unsigned kMaxLinks = 32;
inline constexpr std::uint16_t kEventHeaderMagic = 0xEB0F;

// Builder-emitted record opening each event in the output stream: an SOE packet whose
// payload is event number, timestamp, magic, and the active-link mask.
inline msg::FragmentPacket make_event_header(const msg::EventStamp& s, std::uint32_t active_mask) {
  return msg::build_fragment_packet(
      true, false,
      {kEventHeaderMagic, static_cast<std::uint16_t>(active_mask >> 16), static_cast<std::uint16_t>(active_mask)}, s);
}

inline bool is_event_header(const msg::FragmentPacket& p) {
  return p.soe && !p.eoe && p.payload.size() == 8 && p.payload[5] == kEventHeaderMagic;
}

inline std::uint32_t event_header_mask(const msg::FragmentPacket& p) {
  return (std::uint32_t{p.payload[6]} << 16) | p.payload[7];
}

// Global end-of-event record: EOE set, no payload.
inline msg::FragmentPacket make_global_eoe() { return msg::build_fragment_packet(false, true, {}); }

inline bool is_global_eoe(const msg::FragmentPacket& p) { return !p.soe && p.eoe && p.payload.empty(); }

enum class BuilderPhase { AwaitSOE, Body, Halted };

inline const char* to_string(BuilderPhase p) {
  switch (p) {
    case BuilderPhase::AwaitSOE: return "await_soe";
    case BuilderPhase::Body: return "body";
    case BuilderPhase::Halted: return "halted";
  }
  return "?";
}

enum class HaltReason { SoeMismatch, NonSoeFirst };

// EachEvent hands the buffer over after every global EOE. FullBuffers keeps filling
// across events and hands over early only after an incomplete event, so the frame flag
// still names exactly one event.
enum class FlushPolicy { EachEvent, FullBuffers };

struct HaltInfo {
  HaltReason reason;
  unsigned link = 0;
  msg::EventStamp expected;
  msg::EventStamp received;

  std::string describe() const {
    std::ostringstream os;
    if (reason == HaltReason::SoeMismatch) {
      os << "soe_mismatch link " << link << ": expected event " << expected.event_number << " ts "
         << expected.timestamp << ", got event " << received.event_number << " ts " << received.timestamp;
    } else {
      os << "non_soe_first link " << link;
    }
    return os.str();
  }
};

struct BuilderStats {
  std::uint64_t events = 0;
  std::uint64_t incomplete_events = 0;
  std::uint64_t scans = 0;
  std::uint64_t stalls = 0;
  std::uint64_t discarded_inactive = 0;
  std::array<std::uint64_t, kMaxLinks> forwarded{};
  std::array<std::uint64_t, kMaxLinks> crc_drops{};
};

// Round-robin event builder over the FE-FIFOs of the active links.
class EventBuilder {
 public:
  EventBuilder(std::span<DataPump> pumps, PacketMover& mover, std::uint32_t active_mask)
      : pumps_(pumps), mover_(mover), active_(active_mask) {
    if (pumps.size() > kMaxLinks) throw ConfigError("event builder: more than 32 links");
  }

  BuilderPhase phase() const { return phase_; }
  const std::optional<HaltInfo>& halt() const { return halt_; }
  std::uint32_t active_mask() const { return active_; }
  const BuilderStats& stats() const { return stats_; }
  std::optional<msg::EventStamp> current_stamp() const { return ref_; }
  unsigned scan_cursor() const { return cursor_; }

  void set_flush_policy(FlushPolicy p) { flush_ = p; }
  FlushPolicy flush_policy() const { return flush_; }

  void set_active_mask(std::uint32_t m) {
    if (phase_ != BuilderPhase::AwaitSOE || seen_soe_ != 0) throw Error("event builder: active set changed mid-event");
    active_ = m;
  }

  // Operator reset of a halted builder.
  void reset() {
    phase_ = BuilderPhase::AwaitSOE;
    halt_.reset();
    begin_event();
  }

  // One scan. Returns true if any packet moved or the phase changed.
  bool step() {
    if (phase_ == BuilderPhase::Halted) return false;
    ++stats_.scans;
    bool progress = discard_inactive();
    if (phase_ == BuilderPhase::AwaitSOE) return scan_soe() || progress;
    return scan_body() || progress;
  }

 private:
  struct Inspected {
    bool soe = false;
    bool eoe = false;
    bool crc_ok = false;
    std::optional<msg::EventStamp> stamp;
  };

  // Flags come from the header word even when the CRC fails.
  static Inspected inspect(const std::vector<std::uint8_t>& bytes) {
    Inspected r;
    auto h = msg::peek_header(bytes);
    r.soe = h & msg::kSoeBit;
    r.eoe = h & msg::kEoeBit;
    try {
      auto d = msg::deserialize(bytes);
      r.crc_ok = d.crc_ok;
      if (d.crc_ok) r.stamp = d.packet.stamp();
    } catch (const MalformedInput&) {
      r.crc_ok = false;
    }
    return r;
  }

  bool is_active(unsigned link) const { return link < pumps_.size() && ((active_ >> link) & 1u); }

  void begin_event() {
    seen_soe_ = 0;
    done_ = 0;
    ref_.reset();
    incomplete_ = false;
    header_written_ = false;
  }

  bool discard_inactive() {
    bool any = false;
    for (unsigned l = 0; l < pumps_.size(); ++l) {
      if (is_active(l)) continue;
      while (!pumps_[l].empty()) {
        pumps_[l].pop();
        ++stats_.discarded_inactive;
        any = true;
      }
    }
    return any;
  }

  void halt_with(HaltInfo h) {
    phase_ = BuilderPhase::Halted;
    halt_ = h;
  }

  bool scan_soe() {
    bool progress = false;
    for (unsigned l = 0; l < pumps_.size(); ++l) {
      if (!is_active(l) || ((seen_soe_ >> l) & 1u)) continue;
      auto* head = pumps_[l].head();
      if (!head) continue;
      auto d = inspect(*head);
      if (!d.soe) {
        halt_with({HaltReason::NonSoeFirst, l, ref_.value_or(msg::EventStamp{}), {}});
        return true;
      }
      seen_soe_ |= std::uint32_t{1} << l;
      progress = true;
      if (!d.crc_ok) {
        incomplete_ = true;  // dropped when unloaded in the body phase
        continue;
      }
      auto s = d.stamp;
      if (!s) {
        halt_with({HaltReason::NonSoeFirst, l, ref_.value_or(msg::EventStamp{}), {}});
        return true;
      }
      if (!ref_) {
        ref_ = *s;
      } else if (!(*ref_ == *s)) {
        halt_with({HaltReason::SoeMismatch, l, *ref_, *s});
        return true;
      }
    }
    std::uint32_t need = active_ & link_mask();
    if (seen_soe_ != need || need == 0) return progress;
    if (!ref_) ref_ = msg::EventStamp{};  // every SOE was corrupted
    if (!header_written_) {
      auto bytes = msg::serialize(make_event_header(*ref_, need));
      if (!mover_.write(bytes, ref_->event_number)) {
        ++stats_.stalls;
        return progress;
      }
      header_written_ = true;
    }
    phase_ = BuilderPhase::Body;
    return true;
  }

  bool scan_body() {
    bool progress = false;
    std::uint32_t need = active_ & link_mask();
    unsigned n = static_cast<unsigned>(pumps_.size());
    for (unsigned k = 0; k < n && done_ != need; ++k) {
      unsigned l = (cursor_ + k) % n;
      if (!is_active(l) || ((done_ >> l) & 1u)) continue;
      auto* head = pumps_[l].head();
      if (!head) continue;
      auto d = inspect(*head);
      if (d.crc_ok) {
        if (!mover_.write(*head, ref_->event_number)) {
          ++stats_.stalls;
          cursor_ = l;  // resume here once a descriptor returns
          return progress;
        }
        ++stats_.forwarded[l];
      } else {
        ++stats_.crc_drops[l];
        incomplete_ = true;
      }
      pumps_[l].pop();
      progress = true;
      if (d.eoe) done_ |= std::uint32_t{1} << l;
    }
    cursor_ = (cursor_ + 1) % n;
    if (done_ != need) return progress;
    if (!mover_.write(msg::serialize(make_global_eoe()), ref_->event_number)) {
      ++stats_.stalls;
      return progress;
    }
    mover_.note_event_end();
    if (flush_ == FlushPolicy::EachEvent || incomplete_) mover_.flush(BufferFlags{incomplete_, true});
    ++stats_.events;
    if (incomplete_) ++stats_.incomplete_events;
    phase_ = BuilderPhase::AwaitSOE;
    begin_event();
    return true;
  }

  std::uint32_t link_mask() const {
    return pumps_.size() >= 32 ? 0xFFFFFFFFu : ((std::uint32_t{1} << pumps_.size()) - 1);
  }

  std::span<DataPump> pumps_;
  PacketMover& mover_;
  std::uint32_t active_;
  BuilderPhase phase_ = BuilderPhase::AwaitSOE;
  std::optional<HaltInfo> halt_;
  std::uint32_t seen_soe_ = 0;
  std::uint32_t done_ = 0;
  std::optional<msg::EventStamp> ref_;
  bool incomplete_ = false;
  bool header_written_ = false;
  unsigned cursor_ = 0;
  FlushPolicy flush_ = FlushPolicy::EachEvent;
  BuilderStats stats_;
};

}  // namespace asymnet::backend
