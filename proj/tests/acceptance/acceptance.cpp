// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asymnet.hpp"

using namespace asymnet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

BitStream random_bits(std::mt19937_64& rng, std::size_t n) {
  BitStream b(n);
  for (auto& x : b) x = static_cast<Bit>(rng() & 1u);
  return b;
}

std::vector<std::uint16_t> random_words(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint16_t> w(n);
  for (auto& x : w) x = static_cast<std::uint16_t>(rng());
  return w;
}

// ---------------------------------------------------------------- 1
void idle_golden(Outcome& o) {
  using namespace wire;
  const std::string golden = "01100101";
  const std::size_t cycles = 4096;
  ChannelStreams idle{BitStream(cycles * 2, 0), BitStream(cycles, 0), BitStream(cycles, 0)};
  auto line = downstream_tx(idle);
  o.check(line.size() == cycles * 8, "idle line length");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < line.size(); ++i) bad += line[i] != static_cast<Bit>(golden[i % 8] - '0');
  o.check(bad == 0, std::to_string(bad) + " idle symbols differ from 01100101");

  // Receiver joins a live stream at every symbol offset; data follows the idle preamble.
  std::mt19937_64 rng(101);
  auto sched = TdmSchedule::downstream();
  ChannelStreams s;
  for (auto ch : {Channel::A, Channel::B, Channel::C}) {
    s[ch] = BitStream(16 * sched.slots_per_cycle(ch), 0);
    auto d = random_bits(rng, 500 * sched.slots_per_cycle(ch));
    s[ch].insert(s[ch].end(), d.begin(), d.end());
  }
  auto live = downstream_tx(s);
  unsigned locked = 0, phases_seen = 0;
  for (unsigned k = 0; k < 8; ++k) {
    BitView rx(live.data() + k, live.size() - k);
    auto st = bit_slip_sync(rx.subspan(0, 8 * 8));
    bool ok = st.locked && st.bit_slip_offset == k && st.half_bit_phase == k % 2;
    // Phase rule: the selected clock sees a rotation of 0100, the other one 1011.
    auto window = rx.subspan(0, 8);
    auto chosen = bits_to_string(manchester_sample(window, st.half_bit_phase));
    auto other = bits_to_string(manchester_sample(window, 1 - st.half_bit_phase));
    auto rot = [](const std::string& x, const std::string& pat) { return (pat + pat).find(x) != std::string::npos; };
    ok = ok && rot(chosen, "0100") && rot(other, "1011");
    DownstreamReceiver drx;
    ChannelStreams got;
    for (std::size_t i = k; i < live.size(); ++i)
      if (auto sb = drx.push(live[i])) got[sb->channel].push_back(sb->bit);
    for (auto ch : {Channel::A, Channel::B, Channel::C}) {
      BitStream tail(s[ch].end() - static_cast<long>(got[ch].size()), s[ch].end());
      ok = ok && !got[ch].empty() && got[ch] == tail;
    }
    ok = ok && drx.coding_violations() == 0;
    o.check(ok, "offset " + std::to_string(k));
    locked += ok;
    phases_seen |= 1u << st.half_bit_phase;
  }
  o.check(phases_seen == 3, "both phases exercised");
  o.detail = "idle symbols " + std::to_string(line.size()) + " bit-exact, lock " + std::to_string(locked) + "/8 offsets";
}

// ---------------------------------------------------------------- 2
void codec_suite(Outcome& o) {
  using namespace msg;
  using wire::Direction;
  constexpr int kTrips = 10000;
  std::mt19937_64 rng(202);
  std::uint64_t mismatches = 0, parity_checks = 0, parity_missed = 0, crc_checks = 0, crc_missed = 0;

  auto flips = [&](const BitStream& f, auto decode_ok) {
    for (std::size_t pos = 1; pos < f.size(); ++pos) {
      auto bad = f;
      bad[pos] ^= 1u;
      ++parity_checks;
      parity_missed += decode_ok(bad);
    }
  };

  // Channel A down: the valid payload space is small enough to enumerate.
  std::set<std::string> a_down_frames;
  for (int i = 0; i < kTrips; ++i) {
    ChannelAMessageDown m;
    m.event_type = rng() & 3u;
    auto sel = rng() % 3;
    m.sampling_stop = sel == 0;
    m.sampling_start = sel == 1;
    m.clear_event_counter = rng() & 1u;
    m.clear_timestamp = rng() & 1u;
    m.sync_sampling_clock = rng() & 1u;
    auto f = encode_channel_a(m);
    o.check(f.size() == kChannelAFrameBits, "A down length");
    auto d = decode_channel_a_down(f);
    mismatches += !(d.parity_ok && d.msg == m);
    a_down_frames.insert(bits_to_string(f));
  }
  for (auto& s : a_down_frames) flips(bits_from_string(s), [](const BitStream& b) { return decode_channel_a_down(b).parity_ok; });

  std::set<std::string> a_up_frames;
  for (int i = 0; i < kTrips; ++i) {
    ChannelAMessageUp u;
    auto sel = rng() % 3;
    u.set_busy = sel == 0;
    u.clear_busy = sel == 1;
    u.trigger_primitives = rng() & 0xFu;
    auto f = encode_channel_a(u);
    o.check(f.size() == kChannelAFrameBits, "A up length");
    auto d = decode_channel_a_up(f);
    mismatches += !(d.parity_ok && d.msg == u);
    a_up_frames.insert(bits_to_string(f));
  }
  for (auto& s : a_up_frames) flips(bits_from_string(s), [](const BitStream& b) { return decode_channel_a_up(b).parity_ok; });

  for (auto dir : {Direction::Downstream, Direction::Upstream}) {
    for (int i = 0; i < kTrips; ++i) {
      ChannelBTransaction t;
      t.broadcast = rng() & 1u;
      t.target_id = rng() & 0x1Fu;
      t.read = rng() & 1u;
      t.write = !t.read;
      t.byte_enable = rng() & 0xFu;
      t.address = static_cast<std::uint16_t>(rng());
      t.data = static_cast<std::uint32_t>(rng());
      if (dir == Direction::Upstream) {
        t.parity_error = rng() & 1u;
        t.bus_error = rng() & 1u;
      }
      auto f = encode_channel_b(t, dir);
      o.check(f.size() == kChannelBFrameBits, "B length");
      auto d = decode_channel_b(f, dir);
      mismatches += !(d.parity_ok && d.msg == t);
      if (i < 1000) flips(f, [dir](const BitStream& b) { return decode_channel_b(b, dir).parity_ok; });
    }
  }

  for (int i = 0; i < kTrips; ++i) {
    ChannelCRequest r{static_cast<std::uint8_t>(rng()), static_cast<std::uint32_t>(rng()) | (1u << (rng() % 32))};
    auto f = encode_channel_c_request(r);
    o.check(f.size() == kChannelCRequestBits, "C length");
    auto d = decode_channel_c_request(f);
    mismatches += !(d.parity_ok && d.msg == r);
    if (i < 1000) flips(f, [](const BitStream& b) { return decode_channel_c_request(b).parity_ok; });
  }

  // Fragment packets through serialization and line framing.
  auto parser = FrameParser::fragments();
  std::uint64_t parsed_ok = 0;
  for (int i = 0; i < kTrips; ++i) {
    bool soe = rng() & 1u;
    std::size_t words = 2 * (rng() % 511);
    std::optional<EventStamp> stamp;
    if (soe) {
      stamp = EventStamp{static_cast<std::uint32_t>(rng()), rng() & 0xFFFFFFFFFFFFull};
      words = 1 + 2 * (rng() % 508);
    }
    auto p = build_fragment_packet(soe, rng() & 1u, random_words(rng, words), stamp);
    auto bytes = serialize(p);
    auto d = deserialize(bytes);
    bool ok = d.crc_ok && d.packet == p;
    auto frame = encode_fragment_frame(bytes);
    std::optional<ParsedFrame> got;
    for (Bit b : frame) got = parser.push(b);
    for (int z = 0; z < 3 && !got; ++z) got = parser.push(0);
    ok = ok && got && !got->oversize && decode_fragment_frame(got->bits) == bytes;
    parsed_ok += ok;
    mismatches += !ok;
  }
  o.check(parsed_ok == kTrips, "fragment line round trips");

  // Every single-bit flip of whole packets, from empty to maximum size.
  auto crc_flips = [&](const std::vector<std::uint8_t>& bytes) {
    for (std::size_t bit = 0; bit < bytes.size() * 8; ++bit) {
      auto x = bytes;
      x[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
      ++crc_checks;
      bool detected;
      try {
        detected = !deserialize(x).crc_ok;
      } catch (const MalformedInput&) {
        detected = true;  // size field flip: length no longer matches
      }
      crc_missed += !detected;
    }
  };
  crc_flips(serialize(build_fragment_packet(false, true, {})));
  crc_flips(serialize(build_fragment_packet(true, false, random_words(rng, 27), EventStamp{7, 99})));
  auto largest = build_fragment_packet(true, true, random_words(rng, 1015), EventStamp{1, 2});
  o.check(largest.serialized_bytes() == kPacketOverheadBytes + kMaxPayloadBytes, "largest packet size");
  crc_flips(serialize(largest));
  // CRC on 64-byte blocks, every single-bit error.
  for (int rep = 0; rep < 16; ++rep) {
    std::vector<std::uint8_t> d(64);
    for (auto& b : d) b = static_cast<std::uint8_t>(rng());
    auto c = crc32(d);
    for (std::size_t bit = 0; bit < 512; ++bit) {
      auto x = d;
      x[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++crc_checks;
      crc_missed += crc32(x) == c;
    }
  }

  o.check(mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");
  o.check(parity_missed == 0, std::to_string(parity_missed) + " parity flips missed");
  o.check(crc_missed == 0, std::to_string(crc_missed) + " CRC flips missed");
  o.detail = "round trips 10000 x {A down, A up, B down, B up, C, fragment}, mismatches " + std::to_string(mismatches) +
             ", frame bits 10/64/42, parity flips " + std::to_string(parity_checks) + " missed " +
             std::to_string(parity_missed) + ", CRC flips " + std::to_string(crc_checks) + " missed " +
             std::to_string(crc_missed);
}

// ---------------------------------------------------------------- 3
void scrambler_properties(Outcome& o) {
  using namespace wire;
  std::mt19937_64 rng(303);
  std::size_t worst = 0, over = 0;
  for (int t = 0; t < 2000; ++t) {
    ScramblerState tx{rng() & kScramblerMask}, rx{rng() & kScramblerMask};
    if (tx == rx) continue;
    auto data = random_bits(rng, 300);
    auto line = scramble(tx, data);
    auto out = descramble(rx, line);
    std::size_t last_bad = 0;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i] != data[i]) last_bad = i + 1;
    worst = std::max(worst, last_bad);
    over += last_bad > kScramblerDelay;
  }
  o.check(worst == kScramblerDelay && over == 0, "resync window " + std::to_string(worst));

  std::size_t pair_ok = 0, trials = 0;
  for (int t = 0; t < 2000; ++t) {
    ScramblerState a, b;
    auto data = random_bits(rng, 400);
    auto line = scramble(a, data);
    std::size_t p = rng() % 300;
    line[p] ^= 1u;
    auto out = descramble(b, line);
    std::vector<std::size_t> errs;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i] != data[i]) errs.push_back(i);
    ++trials;
    pair_ok += errs.size() == 2 && errs[0] == p && errs[1] == p + kScramblerDelay;
  }
  o.check(pair_ok == trials, "line flip pairs " + std::to_string(pair_ok) + "/" + std::to_string(trials));

  ScramblerState z;
  auto zeros = scramble(z, BitStream(100000, 0));
  o.check(popcount(zeros) == 0 && z.history == 0, "zero fixed point");
  o.detail = "resync worst " + std::to_string(worst) + " bits, flip pairs " + std::to_string(pair_ok) + "/" +
             std::to_string(trials) + " at +43, zero state fixed";
}

// ---------------------------------------------------------------- 4
void ber_reproduction(Outcome& o) {
  const std::uint64_t kBits = 13'100'000'000'000ull;
  sim::BerConfig c;
  c.total_bits = kBits;
  c.fast_forward = true;
  auto r = sim::ber_test(c);
  o.check(r.bit_errors == 0 && r.line_errors == 0, "errors on a clean link");
  o.check(r.state_check_ok, "jump-ahead state check");
  o.check(r.upper_bound <= 2.3e-13, "bound " + fmt("%.4e", r.upper_bound));

  std::mt19937_64 rng(404);
  std::uint64_t injected = 0, detected = 0, counted = 0;
  for (auto order : {wire::PrbsOrder::Prbs7, wire::PrbsOrder::Prbs15, wire::PrbsOrder::Prbs23, wire::PrbsOrder::Prbs31}) {
    for (auto point : {sim::InjectionPoint::Payload, sim::InjectionPoint::Line}) {
      sim::BerConfig j = c;
      j.order = order;
      j.injection_point = point;
      for (int k = 0; k < 8; ++k) j.injections.push_back(rng() % kBits);
      auto ri = sim::ber_test(j);
      injected += ri.injected;
      detected += ri.injections_detected;
      auto n = point == sim::InjectionPoint::Payload ? ri.bit_errors : ri.line_errors;
      counted += n;
      o.check(n == ri.injected, "counted errors for one run");
    }
    // single injected error counts exactly once in a materialised run
    sim::BerConfig m;
    m.order = order;
    m.total_bits = 1'000'000;
    m.injections = {rng() % m.total_bits};
    auto rm = sim::ber_test(m);
    injected += 1;
    detected += rm.injections_detected;
    counted += rm.bit_errors;
    o.check(rm.bit_errors == 1, "materialised single error");
  }
  o.check(detected == injected && counted == injected, "injections detected " + std::to_string(detected));
  o.detail = "N " + fmt("%.3g", static_cast<double>(kBits)) + " clean, 95% bound " + fmt("%.4e", r.upper_bound) +
             " (limit 2.3e-13), materialised " + std::to_string(r.materialised_bits) + " bits, injections " +
             std::to_string(detected) + "/" + std::to_string(injected);
}

// ---------------------------------------------------------------- 5
void bootstrap(Outcome& o) {
  unsigned ok_runs = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    sim::SimConfig c;
    c.num_frontends = 32;
    c.seed = seed;
    c.duration = 2 * kPicosPerMilli;
    c.trigger.source = backend::TriggerSource::Software;
    c.transport.enabled = false;
    auto m = sim::run_scenario(c);
    bool ok = m.bootstrap_error.empty() && m.bootstrap_present == 32 && m.bootstrap_verified == 32 &&
              m.active_mask == 0xFFFFFFFFu && m.backend_phase == "running";
    for (auto& l : m.links) ok = ok && l.assigned_id == static_cast<int>(l.link);
    o.check(ok, "seed " + std::to_string(seed) + ": " + m.bootstrap_error);
    ok_runs += ok;
  }
  o.detail = std::to_string(ok_runs) + "/100 seeds with 32/32 IDs equal to port and verified by targeted read";
}

// ---------------------------------------------------------------- 6
void per_link_utilization(Outcome& o) {
  auto c = sim::saturated_link_scenario(2);
  auto m = sim::run_scenario(c);
  const double share_MBps = 200e6 / 8 / 1e6;
  const double floor = 0.85 * share_MBps;
  std::string per;
  for (auto& l : m.links) {
    o.check(l.payload_MB_per_s >= floor, "link " + std::to_string(l.link) + " " + fmt("%.2f", l.payload_MB_per_s));
    per += fmt(" %.2f", l.payload_MB_per_s) + " MB/s (" + fmt("%.1f%%", 100 * l.payload_MB_per_s / share_MBps) + ")";
  }
  o.check(m.client.events > 0 && m.client.verified_events == m.client.events, "all delivered events verified");
  o.check(m.client.payload_mismatches == 0 && m.violations.total() == 0, "mismatches or violations");
  o.detail = "per-link payload" + per + ", floor " + fmt("%.2f", floor) + " MB/s, C utilization " +
             fmt("%.3f", m.links[0].c_utilization);
}

// ---------------------------------------------------------------- 7
void throughput_sweep(Outcome& o) {
  auto run = [](std::size_t mtu, unsigned credit) { return sim::run_scenario(sim::credit_sweep_scenario(credit, mtu)); };
  std::vector<double> jumbo(9), small(9);
  double worst_model = 0;
  for (std::size_t mtu : {std::size_t{8192}, std::size_t{1500}}) {
    for (unsigned cr = 1; cr <= 8; ++cr) {
      auto m = run(mtu, cr);
      double model = transport::throughput_model(transport::kDefaultLinkRateBps, static_cast<double>(mtu), cr,
                                                 transport::kDefaultRequestRttSeconds);
      double dev = std::abs(m.client_MB_per_s / model - 1.0);
      worst_model = std::max(worst_model, dev);
      o.check(dev <= 0.10, "model deviation mtu " + std::to_string(mtu) + " credit " + std::to_string(cr));
      o.check(m.client.events > 0 && m.client.verified_events == m.client.events && m.client.gaps == 0,
              "client integrity mtu " + std::to_string(mtu) + " credit " + std::to_string(cr));
      (mtu == 8192 ? jumbo : small)[cr] = m.client_MB_per_s;
    }
  }
  double cap = transport::saturation_throughput(transport::kDefaultLinkRateBps, 8192);
  for (unsigned cr = 2; cr <= 8; ++cr) o.check(jumbo[cr] >= jumbo[cr - 1], "monotone at credit " + std::to_string(cr));
  double worst_sat = 0, worst_ratio = 0;
  for (unsigned cr = 6; cr <= 8; ++cr) {
    double d = std::abs(jumbo[cr] / cap - 1.0);
    worst_sat = std::max(worst_sat, d);
    o.check(d <= 0.02, "saturation at credit " + std::to_string(cr));
    double ratio = small[cr] / jumbo[cr];
    worst_ratio = std::max(worst_ratio, ratio);
    o.check(ratio <= 0.45, "MTU 1500 ratio at credit " + std::to_string(cr));
  }
  std::string curve;
  for (unsigned cr = 1; cr <= 8; ++cr) curve += fmt(cr == 1 ? "%.1f" : ",%.1f", jumbo[cr]);
  o.detail = "8 KB MB/s [" + curve + "], cap " + fmt("%.1f", cap) + ", saturation dev " + fmt("%.2f%%", 100 * worst_sat) +
             ", 1.5 KB/8 KB <= " + fmt("%.1f%%", 100 * worst_ratio) + ", worst model dev " + fmt("%.2f%%", 100 * worst_model);
}

// ---------------------------------------------------------------- 8
sim::SimConfig fault_run(unsigned cards, unsigned triggers) {
  sim::SimConfig c;
  c.num_frontends = cards;
  c.trigger.max_triggers = triggers;
  c.duration = kPicosPerMilli + triggers * 110 * kPicosPerMicro;
  return c;
}

void fault_matrix(Outcome& o) {
  constexpr unsigned kEvents = 120;
  std::string d;

  {  // (a) corrupted fragment
    auto c = fault_run(4, kEvents);
    c.faults.push_back({sim::FaultType::CrcCorrupt, 2, 0, 200, 1, wire::Direction::Upstream});
    auto m = sim::run_scenario(c);
    bool ok = m.crc_faults_applied == 1 && m.links[2].crc_drops == 1 && m.events_built == kEvents &&
              m.client.events == kEvents && m.client.incomplete_events == 1 && m.client.verified_events == kEvents - 1 &&
              m.client.payload_mismatches == 0 && m.client.crc_errors == 0 && m.builder_phase != "halted";
    o.check(ok, "crc_corrupt");
    d += "(a) " + std::to_string(m.client.verified_events) + " verified + " + std::to_string(m.client.incomplete_events) +
         " incomplete; ";
  }
  {  // (b) event-number skew on one link
    auto c = fault_run(4, kEvents);
    c.faults.push_back({sim::FaultType::SoeSkew, 3, 1000 * kPicosPerMicro + 105 * 100 * kPicosPerMicro, 0, 1,
                        wire::Direction::Upstream});
    auto m1 = sim::run_scenario(c);
    auto m2 = sim::run_scenario(c);
    bool ok = m1.builder_phase == "halted" && m1.halt_reason.find("soe_mismatch link 3") != std::string::npos &&
              m1.halt_reason == m2.halt_reason && m1.events_built == m2.events_built && m1.events_built >= 100 &&
              m1.client.verified_events == m1.events_built && m1.client.payload_mismatches == 0 &&
              to_json_lines(m1) == to_json_lines(m2);
    o.check(ok, "soe_skew: " + m1.halt_reason);
    d += "(b) halted after " + std::to_string(m1.events_built) + " verified events [" + m1.halt_reason + "]; ";
  }
  {  // (c) non-SOE first packet after 100 good events
    const frontend::EventGeneratorConfig gen{4, 20, frontend::FillPattern::Prbs, 0};
    backend::BufferPool pool(backend::PoolConfig{.buffer_bytes = 64 + 4096, .header_reserve = 64, .pool_size = 16});
    backend::PacketMover mover(pool);
    std::vector<backend::DataPump> pumps;
    for (unsigned l = 0; l < 4; ++l) pumps.emplace_back(l);
    backend::EventBuilder builder(std::span<backend::DataPump>(pumps), mover, 0xFu);
    transport::GeneratorTruth truth{};
    for (unsigned l = 0; l < 4; ++l) truth[l] = gen;
    transport::TransportClient client(1000, truth);
    transport::TransportServer server(pool);
    server.on_grant({1u << 30, 0});
    auto pkt = [&](unsigned l, std::uint32_t ev, unsigned ch) {
      return msg::serialize(frontend::generate_packet(gen, {static_cast<std::uint8_t>(l), ev, ev * 7ull}, ch));
    };
    auto pump_all = [&] {
      while (builder.step()) {
      }
      while (auto f = server.take_frame()) {
        client.on_frame(f->bytes);
        server.frame_done();
      }
    };
    for (std::uint32_t ev = 0; ev < 100; ++ev) {
      for (unsigned ch = 0; ch < gen.channels_per_event; ++ch)
        for (auto& p : pumps) p.on_packet(pkt(p.link_id(), ev, ch));
      pump_all();
    }
    bool before = builder.phase() == backend::BuilderPhase::AwaitSOE && client.stats().verified_events == 100;
    pumps[0].on_packet(pkt(0, 100, 0));
    pumps[1].on_packet(pkt(1, 100, 2));  // mid-event packet where an SOE belongs
    pump_all();
    bool halted = builder.phase() == backend::BuilderPhase::Halted && builder.halt() &&
                  builder.halt()->reason == backend::HaltReason::NonSoeFirst && builder.halt()->link == 1;
    o.check(before && halted, "non_soe_first");
    d += "(c) " + std::to_string(client.stats().verified_events) + " verified then " +
         (builder.halt() ? builder.halt()->describe() : std::string("no halt")) + "; ";
  }
  {  // (d) descriptor starvation
    auto c = fault_run(4, kEvents);
    c.pool_size = 2;
    c.transport.mtu = 1500;
    c.trigger.period = 200 * kPicosPerMicro;
    c.duration = kPicosPerMilli + kEvents * 220 * kPicosPerMicro;
    auto m = sim::run_scenario(c);
    bool ok = m.mover_stalls > 0 && m.client.verified_events == kEvents && m.client.events == kEvents &&
              m.client.gaps == 0 && m.client.incomplete_events == 0 && m.client.payload_mismatches == 0 &&
              m.violations.total() == 0;
    o.check(ok, "pool starvation");
    d += "(d) " + std::to_string(m.mover_stalls) + " stalls, " + std::to_string(m.client.verified_events) + "/" +
         std::to_string(kEvents) + " verified";
  }
  o.detail = d;
}

// ---------------------------------------------------------------- 9
void determinism(Outcome& o) {
  auto base = fault_run(4, 10);
  std::string d;
  for (auto a : {sim::Abstraction::MessageLevel, sim::Abstraction::SymbolLevel}) {
    auto c = base;
    c.abstraction = a;
    c.ber = a == sim::Abstraction::SymbolLevel ? 1e-5 : 0.0;
    c.record_messages = true;
    sim::Simulation s1(c), s2(c);
    auto m1 = s1.run();
    auto m2 = s2.run();
    bool same = to_json_lines(m1) == to_json_lines(m2) && s1.messages() == s2.messages() &&
                m1.client.digest == m2.client.digest;
    o.check(same, std::string("repeat ") + sim::to_string(a));
    c.seed += 1;
    bool differs = to_json_lines(sim::run_scenario(c)) != to_json_lines(m1);
    o.check(differs, std::string("seed sensitivity ") + sim::to_string(a));
  }
  d += "repeat runs byte-identical at both levels; ";

  auto c = base;
  c.record_messages = true;
  sim::Simulation ml(c);
  auto mm = ml.run();
  c.abstraction = sim::Abstraction::SymbolLevel;
  sim::Simulation sl(c);
  auto ms = sl.run();
  bool eq = ml.messages() == sl.messages() && mm.message_digest == ms.message_digest && mm.client.digest == ms.client.digest &&
            ms.client.verified_events == 10 && mm.client.verified_events == 10 && ms.framing_errors == 0;
  o.check(eq, "symbol vs message level");
  d += "10-event run: " + std::to_string(ml.messages().size()) + " vs " + std::to_string(sl.messages().size()) +
       " delivered messages, " + (eq ? "identical" : "different");
  o.detail = d;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "idle pattern golden and lock", 1, idle_golden},
      {2, "codec round trips", 30, codec_suite},
      {3, "scrambler properties", 1, scrambler_properties},
      {4, "BER bound and injection", 120, ber_reproduction},
      {5, "bootstrap 32 cards x 100 seeds", 30, bootstrap},
      {6, "per-link utilization", 120, per_link_utilization},
      {7, "credit sweep shape", 300, throughput_sweep},
      {8, "event-builder fault matrix", 60, fault_matrix},
      {9, "determinism and abstraction equivalence", 120, determinism},
  };
  int failed = 0;
  for (auto& c : criteria) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < c.limit_s, "runtime " + fmt("%.2f", secs) + " s over " + fmt("%.0f", c.limit_s) + " s");
    std::string extra;
    for (auto& f : o.failures) extra += " !" + f;
    std::printf("CRITERION %d %s: %s | %s | %.2f s%s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                extra.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
