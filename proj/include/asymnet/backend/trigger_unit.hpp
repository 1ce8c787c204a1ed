#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "asymnet/core/time.hpp"
#include "asymnet/msg/channel_a.hpp"

namespace asymnet::backend {

enum class TriggerSource { Software, Periodic, External };

inline TriggerSource parse_trigger_source(std::string_view s) {
  if (s == "software") return TriggerSource::Software;
  if (s == "periodic") return TriggerSource::Periodic;
  if (s == "external") return TriggerSource::External;
  throw ConfigError("unknown trigger source: " + std::string(s));
}

struct TriggerConfig {
  TriggerSource source = TriggerSource::Periodic;
  Time period = 100 * kPicosPerMilli;  // 10 Hz
  Time first_at = 0;                    // earliest first trigger (after start-up)
  std::uint8_t event_type = 0;
  bool busy_throttle = true;
  Time ack_timeout = 1 * kPicosPerMilli;
  std::uint64_t max_triggers = 0;  // 0: unlimited
};

struct TriggerStats {
  std::uint64_t issued = 0;
  std::uint64_t deferred_busy = 0;
  std::uint64_t ack_timeouts = 0;
  std::uint64_t set_busy_seen = 0;
  std::uint64_t clear_busy_seen = 0;
};

// Emits trigger and sampling-control words on channel A and tracks per-link busy state.
// Sequence per trigger: SAMPLING_STOP to all, wait for every SET_BUSY (or timeout), then
// SAMPLING_START. Under busy throttle a new trigger waits for every CLEAR_BUSY.
class TriggerUnit {
 public:
  explicit TriggerUnit(TriggerConfig cfg = {}) : cfg_(cfg) { next_due_ = cfg.first_at; }

  const TriggerConfig& config() const { return cfg_; }
  const TriggerStats& stats() const { return stats_; }
  void set_links(std::uint32_t mask) { links_ = mask; }
  std::uint32_t links() const { return links_; }
  std::uint32_t busy_mask() const { return busy_; }
  bool awaiting_ack() const { return awaiting_ != 0; }
  bool started() const { return started_; }

  // Start-up word: clears counters and timestamps, aligns sampling clocks, starts sampling.
  msg::ChannelAMessageDown start_message() {
    started_ = true;
    msg::ChannelAMessageDown m;
    m.sampling_start = true;
    m.clear_event_counter = true;
    m.clear_timestamp = true;
    m.sync_sampling_clock = true;
    return m;
  }

  void software_trigger() { ++soft_pending_; }
  void external_trigger() { ++soft_pending_; }

  // Earliest time at which poll() may produce a trigger, ignoring busy state.
  std::optional<Time> next_due() const {
    if (!started_ || exhausted()) return std::nullopt;
    if (cfg_.source == TriggerSource::Periodic) return next_due_;
    return std::nullopt;
  }

  // Next channel A word to send at `now`, if any.
  std::optional<msg::ChannelAMessageDown> poll(Time now) {
    if (!started_) return std::nullopt;
    if (awaiting_ != 0) {
      if (now - issued_at_ >= cfg_.ack_timeout) {
        ++stats_.ack_timeouts;
        awaiting_ = 0;
        return sampling_start();
      }
      return std::nullopt;
    }
    if (restart_pending_) {
      restart_pending_ = false;
      return sampling_start();
    }
    if (exhausted()) return std::nullopt;
    bool due = false;
    if (cfg_.source == TriggerSource::Periodic) due = now >= next_due_;
    else due = soft_pending_ > 0;
    if (!due) return std::nullopt;
    if (cfg_.busy_throttle && (busy_ & links_) != 0) {
      if (!deferred_) ++stats_.deferred_busy;
      deferred_ = true;
      return std::nullopt;
    }
    deferred_ = false;
    if (cfg_.source == TriggerSource::Periodic) {
      while (next_due_ <= now) next_due_ += cfg_.period;
    } else {
      --soft_pending_;
    }
    awaiting_ = links_;
    issued_at_ = now;
    ++stats_.issued;
    if (awaiting_ == 0) restart_pending_ = true;
    return msg::ChannelAMessageDown::trigger(cfg_.event_type);
  }

  void on_upstream(unsigned link, const msg::ChannelAMessageUp& m) {
    auto bit = std::uint32_t{1} << link;
    if (m.set_busy) {
      ++stats_.set_busy_seen;
      busy_ |= bit;
      if (awaiting_ & bit) {
        awaiting_ &= ~bit;
        if (awaiting_ == 0) restart_pending_ = true;
      }
    }
    if (m.clear_busy) {
      ++stats_.clear_busy_seen;
      busy_ &= ~bit;
    }
  }

  std::optional<Time> ack_deadline() const {
    if (awaiting_ == 0) return std::nullopt;
    return issued_at_ + cfg_.ack_timeout;
  }

 private:
  bool exhausted() const { return cfg_.max_triggers != 0 && stats_.issued >= cfg_.max_triggers; }

  static msg::ChannelAMessageDown sampling_start() {
    msg::ChannelAMessageDown m;
    m.sampling_start = true;
    return m;
  }

  TriggerConfig cfg_;
  TriggerStats stats_;
  std::uint32_t links_ = 0;
  std::uint32_t busy_ = 0;
  std::uint32_t awaiting_ = 0;
  bool started_ = false;
  bool restart_pending_ = false;
  bool deferred_ = false;
  Time next_due_ = 0;
  Time issued_at_ = 0;
  std::uint64_t soft_pending_ = 0;
};

}  // namespace asymnet::backend
