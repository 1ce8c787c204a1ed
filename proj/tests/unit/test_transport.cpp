#include <gtest/gtest.h>

#include <cmath>

#include "asymnet/backend/buffer_pool.hpp"
#include "asymnet/backend/event_builder.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/transport/client.hpp"
#include "asymnet/transport/frame.hpp"
#include "asymnet/transport/model.hpp"
#include "asymnet/transport/server.hpp"
#include "asymnet/transport/udp_loopback.hpp"

using namespace asymnet;
using namespace asymnet::transport;

namespace {

const frontend::EventGeneratorConfig kGen{2, 10, frontend::FillPattern::Counter, 0};

void append(std::vector<std::uint8_t>& out, const msg::FragmentPacket& p) {
  auto b = msg::serialize(p);
  out.insert(out.end(), b.begin(), b.end());
}

// Content of one whole event from a single card.
std::vector<std::uint8_t> event_content(std::uint32_t ev, std::uint8_t card = 0) {
  std::vector<std::uint8_t> c;
  frontend::EventId id{card, ev, ev * 3ull};
  append(c, backend::make_event_header({ev, ev * 3ull}, 1u << card));
  for (unsigned ch = 0; ch < kGen.channels_per_event; ++ch) append(c, frontend::generate_packet(kGen, id, ch));
  append(c, backend::make_global_eoe());
  return c;
}

std::vector<std::uint8_t> frame(std::uint32_t seq, std::uint8_t grant, const std::vector<std::uint8_t>& content,
                                std::uint8_t flags = kFlagLastOfEvent) {
  std::vector<std::uint8_t> f(kTransportHeaderBytes + content.size());
  TransportHeader h;
  h.sequence = seq;
  h.flags = flags;
  h.grant_id = grant;
  write_header(f.data(), h);
  std::copy(content.begin(), content.end(), f.begin() + kTransportHeaderBytes);
  return f;
}

GeneratorTruth truth_for(unsigned cards) {
  GeneratorTruth t{};
  for (unsigned c = 0; c < cards; ++c) t[c] = kGen;
  return t;
}

}  // namespace

TEST(TransportFrame, HeaderRoundTripBigEndian) {
  std::uint8_t b[kTransportHeaderBytes];
  TransportHeader h;
  h.sequence = 0x01020304;
  h.flags = kFlagIncompleteEvent;
  h.grant_id = 9;
  write_header(b, h);
  EXPECT_EQ(b[0], 0xAA);
  EXPECT_EQ(b[1], 0x55);
  EXPECT_EQ(b[2], 0x01);
  EXPECT_EQ(b[5], 0x04);
  auto r = read_header(std::span<const std::uint8_t>(b, kTransportHeaderBytes));
  EXPECT_EQ(r.magic, kTransportMagic);
  EXPECT_EQ(r.sequence, h.sequence);
  EXPECT_EQ(r.flags, h.flags);
  EXPECT_EQ(r.grant_id, h.grant_id);
  EXPECT_THROW(read_header(std::span<const std::uint8_t>(b, 3)), MalformedInput);
}

TEST(TransportFrame, GrantRoundTripAndReject) {
  std::uint8_t b[kGrantBytes];
  write_grant(b, {12345, 77});
  auto g = read_grant(std::span<const std::uint8_t>(b, kGrantBytes));
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->frames, 12345u);
  EXPECT_EQ(g->grant_id, 77);
  b[0] ^= 1;
  EXPECT_FALSE(read_grant(std::span<const std::uint8_t>(b, kGrantBytes)).has_value());
  EXPECT_FALSE(read_grant(std::span<const std::uint8_t>(b, 3)).has_value());
}

TEST(Model, FrozenValues) {
  // t_frame = 8192 * 8 / 1e9 = 65.536 us; one frame per 365.536 us cycle.
  EXPECT_NEAR(throughput_model(1e9, 8192, 1, 300e-6), 8126.0 / 365.536e-6 / 1e6, 1e-9);
  EXPECT_NEAR(throughput_model(1e9, 8192, 1, 300e-6), 22.2303, 1e-4);
  // From credit 6 the burst outlasts the round trip: link saturated.
  EXPECT_NEAR(throughput_model(1e9, 8192, 6, 300e-6), 123.9929, 1e-4);
  EXPECT_NEAR(throughput_model(1e9, 8192, 8, 300e-6), saturation_throughput(1e9, 8192), 1e-9);
  EXPECT_NEAR(saturation_throughput(1e9, 8192), 125.0 * 8126.0 / 8192.0, 1e-12);
  EXPECT_LT(throughput_model(1e9, 8192, 5, 300e-6), saturation_throughput(1e9, 8192));
  EXPECT_NEAR(throughput_model(1e9, 1500, 8, 300e-6), 8 * 1434.0 / 312e-6 / 1e6, 1e-9);
  EXPECT_THROW(throughput_model(1e9, 60, 1, 300e-6), ConfigError);
  EXPECT_THROW(throughput_model(1e9, 8192, 0, 300e-6), ConfigError);
}

TEST(Model, MonotoneInCreditAndMtu) {
  double prev = 0;
  for (int n = 1; n <= 16; ++n) {
    double v = throughput_model(1e9, 8192, n, 300e-6);
    EXPECT_GE(v, prev - 1e-9);
    EXPECT_LE(v, saturation_throughput(1e9, 8192) + 1e-9);
    prev = v;
  }
  for (int n = 1; n <= 8; ++n)
    EXPECT_LT(throughput_model(1e9, 1500, n, 300e-6), throughput_model(1e9, 8192, n, 300e-6));
}

TEST(Server, SendsOnlyWithCreditAndSequencesFrames) {
  backend::BufferPool pool(backend::PoolConfig{256, 64, 8});
  TransportServer s(pool);
  for (int i = 0; i < 5; ++i) {
    auto d = *pool.free_fifo().pop();
    d.fill_level = 10 + i;
    pool.filled_fifo().push(d);
  }
  EXPECT_FALSE(s.can_send());  // no grant yet
  s.on_grant({2, 4});
  auto f0 = s.take_frame();
  ASSERT_TRUE(f0.has_value());
  EXPECT_FALSE(s.take_frame().has_value());  // one frame outstanding at a time
  s.frame_done();
  auto f1 = s.take_frame();
  s.frame_done();
  EXPECT_FALSE(s.can_send());  // credit used up
  auto h0 = read_header(f0->bytes), h1 = read_header(f1->bytes);
  EXPECT_EQ(h0.sequence, 0u);
  EXPECT_EQ(h1.sequence, 1u);
  EXPECT_EQ(h1.grant_id, 4);
  EXPECT_EQ(f1->bytes.size(), kTransportHeaderBytes + 11);
  s.on_grant({8, 5});  // grants are absolute, not additive
  EXPECT_EQ(s.credit(), 8u);
  int sent = 0;
  while (auto f = s.take_frame()) {
    s.frame_done();
    ++sent;
  }
  EXPECT_EQ(sent, 3);
  EXPECT_EQ(pool.free_fifo().size(), 8u);
  EXPECT_LE(s.stats().max_frames_per_grant, 8u);
}

TEST(Server, RejectsTooSmallReserve) {
  backend::BufferPool pool(backend::PoolConfig{256, 4, 8});
  EXPECT_THROW(TransportServer s(pool), ConfigError);
}

TEST(Client, VerifiesEventsAndHandsOutGrants) {
  TransportClient c(4, truth_for(1));
  auto g0 = c.initial_grant();
  EXPECT_EQ(g0.frames, 4u);
  EXPECT_EQ(g0.grant_id, 0);
  auto g1 = c.on_frame(frame(0, 0, event_content(0)));
  ASSERT_TRUE(g1.has_value());  // first frame of the latest grant
  EXPECT_EQ(g1->grant_id, 1);
  EXPECT_FALSE(c.on_frame(frame(1, 0, event_content(1))).has_value());  // stale grant id
  EXPECT_TRUE(c.on_frame(frame(2, 1, event_content(2))).has_value());
  EXPECT_EQ(c.stats().events, 3u);
  EXPECT_EQ(c.stats().verified_events, 3u);
  EXPECT_EQ(c.stats().gaps, 0u);
}

TEST(Client, MagicErrorAndShortFrame) {
  TransportClient c(1);
  auto f = frame(0, 0, event_content(0));
  f[0] = 0x12;
  c.on_frame(f);
  c.on_frame(std::vector<std::uint8_t>(3));
  EXPECT_EQ(c.stats().magic_errors, 2u);
  EXPECT_EQ(c.stats().frames, 0u);
}

TEST(Client, SequenceGapBreaksEventAndResyncs) {
  TransportClient c(1, truth_for(1));
  auto ev = event_content(0);
  // Event 0 split across frames 0 and 1; frame 1 is lost.
  std::vector<std::uint8_t> first(ev.begin(), ev.begin() + 40), second(ev.begin() + 40, ev.end());
  ASSERT_GT(second.size(), 0u);
  c.on_frame(frame(0, 0, first, 0));
  c.on_frame(frame(2, 0, event_content(1)));
  c.on_frame(frame(3, 0, event_content(2)));
  EXPECT_EQ(c.stats().gaps, 1u);
  EXPECT_EQ(c.stats().lost_frames, 1u);
  EXPECT_EQ(c.stats().broken_events, 1u);
  EXPECT_EQ(c.stats().events, 3u);
  EXPECT_EQ(c.stats().verified_events, 2u);
}

TEST(Client, IncompleteFlagAppliesToEventEndingLast) {
  TransportClient c(1, truth_for(1));
  auto a = event_content(0), b = event_content(1);
  std::vector<std::uint8_t> both = a;
  both.insert(both.end(), b.begin(), b.end());
  c.on_frame(frame(0, 0, both, kFlagIncompleteEvent | kFlagLastOfEvent));
  ASSERT_EQ(c.events().size(), 2u);
  EXPECT_FALSE(c.events()[0].incomplete_flag);
  EXPECT_TRUE(c.events()[1].incomplete_flag);
  EXPECT_EQ(c.stats().incomplete_events, 1u);
  EXPECT_EQ(c.stats().verified_events, 1u);
}

TEST(Client, PayloadMismatchAndCrcErrorDetected) {
  TransportClient c(1, truth_for(1));
  // A different payload with a valid CRC: caught only by ground truth.
  std::vector<std::uint8_t> content;
  append(content, backend::make_event_header({0, 0}, 1u));
  auto p0 = frontend::generate_packet(kGen, {0, 0, 0}, 0);
  auto p1 = frontend::generate_packet(kGen, {0, 0, 0}, 1);
  p1.payload.back() ^= 1u;
  p1 = msg::build_fragment_packet(p1.soe, p1.eoe, p1.payload);
  append(content, p0);
  append(content, p1);
  append(content, backend::make_global_eoe());
  c.on_frame(frame(0, 0, content));
  EXPECT_EQ(c.stats().payload_mismatches, 1u);
  EXPECT_EQ(c.stats().verified_events, 0u);

  auto bad = event_content(1);
  bad[40] ^= 0x10;
  c.on_frame(frame(1, 0, bad));
  EXPECT_GE(c.stats().crc_errors, 1u);
  EXPECT_EQ(c.stats().verified_events, 0u);
}

TEST(Client, ProvenanceMismatchDetected) {
  TransportClient c(1, truth_for(2));
  // Mask says card 1, fragments are stamped by card 0.
  std::vector<std::uint8_t> content;
  append(content, backend::make_event_header({0, 0}, 0b10u));
  for (unsigned ch = 0; ch < kGen.channels_per_event; ++ch)
    append(content, frontend::generate_packet(kGen, {0, 0, 0}, ch));
  append(content, backend::make_global_eoe());
  c.on_frame(frame(0, 0, content));
  EXPECT_GE(c.stats().provenance_errors, 1u);
  EXPECT_EQ(c.stats().verified_events, 0u);
}

TEST(Client, ReissueUsesFreshGrantId) {
  TransportClient c(3);
  auto a = c.initial_grant();
  auto b = c.reissue_grant();
  EXPECT_NE(a.grant_id, b.grant_id);
  EXPECT_EQ(b.frames, 3u);
  EXPECT_EQ(c.stats().grants_issued, 2u);
  EXPECT_THROW(TransportClient(0), ConfigError);
}

TEST(UdpLoopback, DeliversEveryEventBitExact) {
  UdpLoopbackConfig cfg;
  cfg.cards = 4;
  cfg.events = 150;
  cfg.credit = 4;
  auto r = run_udp_loopback(cfg);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.client.verified_events, 150u);
  EXPECT_EQ(r.client.gaps, 0u);
  EXPECT_EQ(r.client.payload_mismatches, 0u);
  EXPECT_LE(r.max_frames_per_grant, 4u);
  EXPECT_EQ(r.client.content_bytes, r.builder_bytes);
}

TEST(UdpLoopback, SmallMtuStillCompletes) {
  UdpLoopbackConfig cfg;
  cfg.cards = 2;
  cfg.events = 50;
  cfg.credit = 1;
  cfg.mtu = 1500;
  auto r = run_udp_loopback(cfg);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.client.verified_events, 50u);
  EXPECT_LE(r.max_frames_per_grant, 1u);
  UdpLoopbackConfig bad = cfg;
  bad.mtu = 100;
  EXPECT_THROW(run_udp_loopback(bad), ConfigError);
}
