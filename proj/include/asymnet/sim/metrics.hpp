#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "asymnet/transport/client.hpp"

namespace asymnet::sim {

struct Violations {
  std::uint64_t descriptor_conservation = 0;
  std::uint64_t credit_exceeded = 0;
  std::uint64_t fifo_overflow = 0;

  std::uint64_t total() const { return descriptor_conservation + credit_exceeded + fifo_overflow; }
};

struct LinkMetrics {
  unsigned link = 0;
  bool present = false;
  bool active = false;
  int assigned_id = -1;
  double c_utilization = 0;     // fraction of upstream channel C slots carrying frame bits
  double payload_MB_per_s = 0;  // verified fragment bytes from this card at the client
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t crc_drops = 0;
  std::uint64_t lost_triggers = 0;
  std::uint64_t link_resets = 0;
  std::uint64_t card_packets_sent = 0;
  std::uint64_t card_parity_errors = 0;
  std::uint64_t backend_parity_errors = 0;
  std::uint64_t oversize = 0;
  std::string pump_fault;
};

struct Metrics {
  std::uint64_t seed = 0;
  std::string abstraction;
  unsigned num_frontends = 0;
  double duration_s = 0;
  double window_s = 0;

  std::string backend_phase;
  std::string bootstrap_error;
  unsigned bootstrap_present = 0;
  unsigned bootstrap_verified = 0;
  std::uint32_t active_mask = 0;

  std::string builder_phase;
  std::string halt_reason;
  std::uint64_t events_built = 0;
  std::uint64_t events_incomplete = 0;
  double event_rate_hz = 0;
  std::uint64_t triggers_issued = 0;
  std::uint64_t trigger_ack_timeouts = 0;
  std::uint64_t mover_bytes = 0;
  std::uint64_t mover_stalls = 0;
  std::uint64_t buffers_filled = 0;
  std::uint64_t requests_sent = 0;
  double downstream_c_utilization = 0;

  transport::ClientStats client;
  double client_MB_per_s = 0;  // transport payload (header + buffer content) in the window
  std::uint64_t transport_frames = 0;
  std::uint64_t transport_dropped = 0;
  double transport_utilization = 0;
  std::uint64_t server_max_frames_per_grant = 0;
  std::uint32_t credit = 0;
  std::size_t mtu = 0;

  std::vector<LinkMetrics> links;
  std::uint64_t crc_faults_applied = 0;
  std::uint64_t framing_errors = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t message_digest = 0;
  Violations violations;
  std::uint64_t audits = 0;
  std::uint64_t sim_events = 0;
};

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

inline nlohmann::json to_json(const transport::ClientStats& c) {
  return {{"frames", c.frames},
          {"content_bytes", c.content_bytes},
          {"magic_errors", c.magic_errors},
          {"gaps", c.gaps},
          {"lost_frames", c.lost_frames},
          {"events", c.events},
          {"verified_events", c.verified_events},
          {"incomplete_events", c.incomplete_events},
          {"broken_events", c.broken_events},
          {"fragments", c.fragments},
          {"fragment_bytes", c.fragment_bytes},
          {"crc_errors", c.crc_errors},
          {"provenance_errors", c.provenance_errors},
          {"payload_mismatches", c.payload_mismatches},
          {"missing_fragments", c.missing_fragments},
          {"malformed", c.malformed},
          {"grants_issued", c.grants_issued},
          {"digest", hex64(c.digest)}};
}

inline nlohmann::json to_json(const LinkMetrics& l) {
  return {{"link", l.link},
          {"present", l.present},
          {"active", l.active},
          {"assigned_id", l.assigned_id},
          {"c_utilization", l.c_utilization},
          {"payload_MB_per_s", l.payload_MB_per_s},
          {"packets", l.packets},
          {"bytes", l.bytes},
          {"forwarded", l.forwarded},
          {"crc_drops", l.crc_drops},
          {"lost_triggers", l.lost_triggers},
          {"link_resets", l.link_resets},
          {"card_packets_sent", l.card_packets_sent},
          {"card_parity_errors", l.card_parity_errors},
          {"backend_parity_errors", l.backend_parity_errors},
          {"oversize", l.oversize},
          {"pump_fault", l.pump_fault}};
}

// Summary record. Links are emitted as separate lines by to_json_lines.
inline nlohmann::json to_json(const Metrics& m) {
  return {{"record", "summary"},
          {"seed", m.seed},
          {"abstraction", m.abstraction},
          {"num_frontends", m.num_frontends},
          {"duration_s", m.duration_s},
          {"window_s", m.window_s},
          {"backend_phase", m.backend_phase},
          {"bootstrap_error", m.bootstrap_error},
          {"bootstrap_present", m.bootstrap_present},
          {"bootstrap_verified", m.bootstrap_verified},
          {"active_mask", m.active_mask},
          {"builder_phase", m.builder_phase},
          {"halt_reason", m.halt_reason},
          {"events_built", m.events_built},
          {"events_incomplete", m.events_incomplete},
          {"event_rate_hz", m.event_rate_hz},
          {"triggers_issued", m.triggers_issued},
          {"trigger_ack_timeouts", m.trigger_ack_timeouts},
          {"mover_bytes", m.mover_bytes},
          {"mover_stalls", m.mover_stalls},
          {"buffers_filled", m.buffers_filled},
          {"requests_sent", m.requests_sent},
          {"downstream_c_utilization", m.downstream_c_utilization},
          {"client", to_json(m.client)},
          {"client_MB_per_s", m.client_MB_per_s},
          {"transport_frames", m.transport_frames},
          {"transport_dropped", m.transport_dropped},
          {"transport_utilization", m.transport_utilization},
          {"server_max_frames_per_grant", m.server_max_frames_per_grant},
          {"credit", m.credit},
          {"mtu", m.mtu},
          {"crc_faults_applied", m.crc_faults_applied},
          {"framing_errors", m.framing_errors},
          {"messages_delivered", m.messages_delivered},
          {"message_digest", hex64(m.message_digest)},
          {"violations", {{"descriptor_conservation", m.violations.descriptor_conservation},
                          {"credit_exceeded", m.violations.credit_exceeded},
                          {"fifo_overflow", m.violations.fifo_overflow}}},
          {"audits", m.audits},
          {"sim_events", m.sim_events}};
}

inline std::string to_json_lines(const Metrics& m) {
  std::string out = to_json(m).dump() + "\n";
  for (auto& l : m.links) {
    auto j = to_json(l);
    j["record"] = "link";
    out += j.dump() + "\n";
  }
  return out;
}

// CSV row for the client statistics: credit,mtu,MB_per_s,events,incomplete,gaps
inline std::string client_csv_header() { return "credit,mtu,MB_per_s,events,incomplete,gaps"; }
inline std::string client_csv_row(const Metrics& m) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << m.credit << "," << m.mtu << "," << m.client_MB_per_s << "," << m.client.events << ","
     << m.client.incomplete_events << "," << m.client.gaps;
  return os.str();
}

}  // namespace asymnet::sim
