#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "asymnet/msg/channel_b.hpp"

namespace asymnet::frontend {

// Byte addresses of 32-bit registers; accesses must be word aligned.
namespace reg {
inline constexpr std::uint16_t kSerialLow = 0x0000;   // serial bits 31..0
inline constexpr std::uint16_t kSerialHigh = 0x0004;  // serial bits 52..32
inline constexpr std::uint16_t kAssignedId = 0x0010;  // 0xFFFFFFFF until bootstrap
inline constexpr std::uint16_t kLostTriggers = 0x0020;
inline constexpr std::uint16_t kUnknownOpcodes = 0x0024;
// Mapping window, written by broadcast during bootstrap: serial-high, serial-low, then
// the port id, whose write commits the triplet.
inline constexpr std::uint16_t kMapSerialHigh = 0x0040;
inline constexpr std::uint16_t kMapSerialLow = 0x0044;
inline constexpr std::uint16_t kMapPortId = 0x0048;
inline constexpr std::uint16_t kScratchBase = 0x0100;  // read/write up to 0xFFFC
}  // namespace reg

inline constexpr std::uint64_t kSerialMask = (std::uint64_t{1} << 53) - 1;
inline constexpr std::uint32_t kUnassignedId = 0xFFFFFFFFu;

inline std::uint32_t byte_enable_mask(std::uint8_t be) {
  std::uint32_t m = 0;
  for (int i = 0; i < 4; ++i)
    if ((be >> i) & 1u) m |= 0xFFu << (8 * i);
  return m;
}

struct RegisterAccess {
  std::uint32_t data = 0;
  bool bus_error = false;
};

// Register space of one card. Counters live in the card and are passed in on reads.
class RegisterFile {
 public:
  struct Counters {
    std::uint32_t lost_triggers = 0;
    std::uint32_t unknown_opcodes = 0;
  };

  explicit RegisterFile(std::uint64_t serial) : serial_(serial & kSerialMask) {}

  std::uint64_t serial() const { return serial_; }
  std::optional<std::uint8_t> assigned_id() const { return assigned_id_; }
  void clear_assignment() { assigned_id_.reset(); }

  RegisterAccess read(std::uint16_t addr, const Counters& c) const {
    if (addr % 4 != 0) return {0, true};
    switch (addr) {
      case reg::kSerialLow: return {static_cast<std::uint32_t>(serial_), false};
      case reg::kSerialHigh: return {static_cast<std::uint32_t>(serial_ >> 32), false};
      case reg::kAssignedId: return {assigned_id_ ? std::uint32_t{*assigned_id_} : kUnassignedId, false};
      case reg::kLostTriggers: return {c.lost_triggers, false};
      case reg::kUnknownOpcodes: return {c.unknown_opcodes, false};
      case reg::kMapSerialHigh: return {map_high_, false};
      case reg::kMapSerialLow: return {map_low_, false};
      default: break;
    }
    if (addr >= reg::kScratchBase) {
      auto it = scratch_.find(addr);
      return {it == scratch_.end() ? 0u : it->second, false};
    }
    return {0, true};
  }

  // Returns the value now held at `addr` (echoed in the response).
  RegisterAccess write(std::uint16_t addr, std::uint32_t value, std::uint8_t byte_enable) {
    if (addr % 4 != 0) return {value, true};
    auto m = byte_enable_mask(byte_enable);
    auto merge = [&](std::uint32_t old) { return (old & ~m) | (value & m); };
    switch (addr) {
      case reg::kMapSerialHigh: map_high_ = merge(map_high_); return {value, false};
      case reg::kMapSerialLow: map_low_ = merge(map_low_); return {value, false};
      case reg::kMapPortId: {
        std::uint64_t s = (std::uint64_t{map_high_} << 32) | map_low_;
        if (s == serial_ && (value & m) <= 31) assigned_id_ = static_cast<std::uint8_t>(value & m & 0x1Fu);
        return {value, false};
      }
      default: break;
    }
    if (addr >= reg::kScratchBase) {
      auto& slot = scratch_[addr];
      slot = merge(slot);
      return {value, false};
    }
    return {value, true};
  }

 private:
  std::uint64_t serial_;
  std::optional<std::uint8_t> assigned_id_;
  std::uint32_t map_high_ = 0;
  std::uint32_t map_low_ = 0;
  std::unordered_map<std::uint16_t, std::uint32_t> scratch_;
};

}  // namespace asymnet::frontend
