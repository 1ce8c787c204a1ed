#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace asymnet::msg {

// IEEE 802.3 CRC-32: reflected polynomial 0xEDB88320, init 0xFFFFFFFF, final inversion.
namespace detail {
constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
    t[i] = c;
  }
  return t;
}
inline constexpr auto kCrcTable = make_crc_table();
}  // namespace detail

class Crc32 {
 public:
  void update(std::span<const std::uint8_t> bytes) {
    for (auto b : bytes) reg_ = detail::kCrcTable[(reg_ ^ b) & 0xFFu] ^ (reg_ >> 8);
  }
  std::uint32_t value() const { return reg_ ^ 0xFFFFFFFFu; }

 private:
  std::uint32_t reg_ = 0xFFFFFFFFu;
};

inline std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  Crc32 c;
  c.update(bytes);
  return c.value();
}

}  // namespace asymnet::msg
