#include <gtest/gtest.h>

#include <random>

#include "asymnet/wire/chains.hpp"
#include "asymnet/wire/line_sync.hpp"
#include "asymnet/wire/manchester.hpp"
#include "asymnet/wire/scrambler.hpp"
#include "asymnet/wire/tdm.hpp"

using namespace asymnet;
using namespace asymnet::wire;

namespace {

BitStream random_bits(std::mt19937_64& rng, std::size_t n) {
  BitStream b(n);
  for (auto& x : b) x = static_cast<Bit>(rng() & 1u);
  return b;
}

BitStream idle_symbols(std::size_t cycles, std::size_t start_offset = 0) {
  BitStream s;
  for (std::size_t i = 0; i < cycles * 8; ++i) s.push_back(kIdleSymbols[(start_offset + i) % 8]);
  return s;
}

}  // namespace

TEST(Tdm, DownstreamOrderIsABAC) {
  // Tags a0=1 a1=0 b0=1 c0=0 would be ambiguous; use distinct single-bit probes per slot.
  auto sched = TdmSchedule::downstream();
  EXPECT_EQ(tdm_interleave(sched, BitStream{1, 0}, BitStream{0}, BitStream{0}), bits_from_string("1000"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0, 1}, BitStream{0}, BitStream{0}), bits_from_string("0010"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0, 0}, BitStream{1}, BitStream{0}), bits_from_string("0100"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0, 0}, BitStream{0}, BitStream{1}), bits_from_string("0001"));
}

TEST(Tdm, UpstreamOrderIsABCC) {
  auto sched = TdmSchedule::upstream();
  EXPECT_EQ(tdm_interleave(sched, BitStream{1}, BitStream{0}, BitStream{0, 0}), bits_from_string("1000"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0}, BitStream{1}, BitStream{0, 0}), bits_from_string("0100"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0}, BitStream{0}, BitStream{1, 0}), bits_from_string("0010"));
  EXPECT_EQ(tdm_interleave(sched, BitStream{0}, BitStream{0}, BitStream{0, 1}), bits_from_string("0001"));
}

TEST(Tdm, IdleCycleIsAllZero) {
  EXPECT_EQ(tdm_interleave(TdmSchedule::downstream(), BitStream{0, 0}, BitStream{0}, BitStream{0}), BitStream(4, 0));
}

TEST(Tdm, BandwidthShares) {
  auto d = TdmSchedule::downstream();
  auto u = TdmSchedule::upstream();
  EXPECT_EQ(d.slots_per_cycle(Channel::A), 2u);
  EXPECT_EQ(d.slots_per_cycle(Channel::B), 1u);
  EXPECT_EQ(d.slots_per_cycle(Channel::C), 1u);
  EXPECT_EQ(u.slots_per_cycle(Channel::A), 1u);
  EXPECT_EQ(u.slots_per_cycle(Channel::B), 1u);
  EXPECT_EQ(u.slots_per_cycle(Channel::C), 2u);
}

TEST(Tdm, ExhaustedChannelIsMalformed) {
  EXPECT_THROW(tdm_interleave(TdmSchedule::downstream(), BitStream{0}, BitStream{0}, BitStream{0}), MalformedInput);
  EXPECT_THROW(tdm_interleave(TdmSchedule::upstream(), BitStream{0}, BitStream{0, 1}, BitStream{0, 0}), MalformedInput);
}

TEST(Tdm, DeinterleaveInvertsInterleaveAndReportsTrailing) {
  auto sched = TdmSchedule::downstream();
  auto d = tdm_deinterleave(sched, bits_from_string("1101"), 0);
  EXPECT_EQ(d.channels.a, (BitStream{1, 0}));
  EXPECT_EQ(d.channels.b, (BitStream{1}));
  EXPECT_EQ(d.channels.c, (BitStream{1}));
  EXPECT_EQ(d.trailing, 0u);
  auto partial = tdm_deinterleave(sched, bits_from_string("110101"), 0);
  EXPECT_EQ(partial.trailing, 2u);
}

TEST(Tdm, RoundTripLargeRandom) {
  std::mt19937_64 rng(11);
  for (auto sched : {TdmSchedule::downstream(), TdmSchedule::upstream()}) {
    std::size_t cycles = 50000;
    ChannelStreams s;
    for (auto ch : {Channel::A, Channel::B, Channel::C}) s[ch] = random_bits(rng, cycles * sched.slots_per_cycle(ch));
    auto line = tdm_interleave(sched, s);
    ASSERT_EQ(line.size(), cycles * 4);
    EXPECT_EQ(tdm_deinterleave(sched, line).channels, s);
  }
}

TEST(Tdm, IdleLineWithBInversionMarksChannelB) {
  auto sched = TdmSchedule::downstream();
  auto line = invert_b_slots(sched, BitStream(40, 0));
  for (std::size_t i = 0; i < line.size(); ++i) EXPECT_EQ(line[i], i % 4 == 1 ? 1 : 0);
  // The lone 1 per cycle is a B slot: from any start the slot origin is recoverable.
  for (std::size_t start = 0; start < 8; ++start) {
    BitView view(line.data() + start, 16);
    std::size_t one = 0;
    while (view[one] != 1) ++one;
    std::size_t slot_of_first = (4 + 1 - one % 4) % 4;
    EXPECT_EQ(slot_of_first, start % 4);
    EXPECT_EQ(sched.slot(slot_of_first + one), Channel::B);
  }
}

TEST(InvertB, Involution) {
  EXPECT_EQ(invert_channel_b(BitStream{0, 0, 0}), (BitStream{1, 1, 1}));
  std::mt19937_64 rng(2);
  auto x = random_bits(rng, 333);
  EXPECT_EQ(invert_channel_b(invert_channel_b(x)), x);
}

TEST(Manchester, IdleCrossCheck) {
  EXPECT_EQ(manchester_encode(bits_from_string("0100")), bits_from_string("01100101"));
  EXPECT_EQ(manchester_encode(BitStream{1}), (BitStream{1, 0}));
  // The opposite convention (b -> !b, b) fails the idle cross-check.
  BitStream opposite;
  for (Bit b : bits_from_string("0100")) {
    opposite.push_back(b ^ 1u);
    opposite.push_back(b);
  }
  EXPECT_NE(opposite, bits_from_string("01100101"));
}

TEST(Manchester, DcBalanceAndRoundTrip) {
  std::mt19937_64 rng(3);
  auto x = random_bits(rng, 1000);
  auto enc = manchester_encode(x);
  EXPECT_EQ(enc.size(), 2000u);
  EXPECT_EQ(popcount(enc), 1000u);
  EXPECT_EQ(manchester_decode(enc, 0), x);
}

TEST(Manchester, DecodeIdleAndWrongClock) {
  auto idle = bits_from_string("01100101");
  EXPECT_EQ(manchester_decode(idle, 0), bits_from_string("0100"));
  EXPECT_EQ(manchester_sample(idle, 0), bits_from_string("0100"));
  EXPECT_EQ(manchester_sample(idle, 1), bits_from_string("1011"));
}

TEST(Manchester, CodingViolationReportsPosition) {
  auto s = bits_from_string("0110001010");
  try {
    manchester_decode(s, 0);
    FAIL() << "expected a coding violation";
  } catch (const CodingViolation& v) {
    EXPECT_EQ(v.position, 2u);
  }
}

TEST(ResolvePhase, NominalAndShifted) {
  auto idle = idle_symbols(4);
  EXPECT_EQ(resolve_phase(idle), 0u);
  auto shifted = idle_symbols(4, 1);
  EXPECT_EQ(resolve_phase(shifted), 1u);
  // The rejected clock sees the inverted idle cycle 1011.
  auto wrong = manchester_sample(shifted, 0);
  EXPECT_EQ(bits_to_string(BitView(wrong).subspan(0, 4)), "1011");
}

TEST(ResolvePhase, NoiseHasNoLock) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(resolve_phase(random_bits(rng, 64)), NoLock);
}

TEST(BitSlipSync, RecoversEveryOffset) {
  for (unsigned k = 0; k < 8; ++k) {
    auto line = idle_symbols(kDefaultLockThreshold + 2, k);
    auto st = bit_slip_sync(line, kDefaultLockThreshold);
    ASSERT_TRUE(st.locked) << "offset " << k;
    EXPECT_EQ(st.bit_slip_offset, k);
    EXPECT_EQ(st.half_bit_phase, k % 2);
    EXPECT_LE(st.symbols_consumed, 8u * kDefaultLockThreshold + 16);
  }
}

TEST(BitSlipSync, AlignedLocksAfterThresholdCycles) {
  auto st = bit_slip_sync(idle_symbols(10), 4);
  EXPECT_TRUE(st.locked);
  EXPECT_EQ(st.bit_slip_offset, 0u);
  EXPECT_EQ(st.symbols_consumed, 32u);
}

TEST(BitSlipSync, SingleCorruptedSymbolDelaysLock) {
  for (unsigned k = 0; k < 8; ++k) {
    for (std::size_t err = 0; err < 24; ++err) {
      auto line = idle_symbols(8, k);
      line[err] ^= 1u;
      auto st = bit_slip_sync(line, 4);
      ASSERT_TRUE(st.locked);
      EXPECT_EQ(st.bit_slip_offset, k);
      // One extra word for the corrupted one, plus the partial word it sat in.
      EXPECT_LE(st.symbols_consumed, 8u * 4 + 16 + (err / 8) * 8);
    }
  }
}

TEST(BitSlipSync, InsufficientIdle) {
  auto st = bit_slip_sync(idle_symbols(3), 4);
  EXPECT_FALSE(st.locked);
}

TEST(Scrambler, ZeroFixedPoint) {
  ScramblerState s;
  EXPECT_EQ(scramble(s, BitStream(500, 0)), BitStream(500, 0));
  ScramblerState d;
  EXPECT_EQ(descramble(d, BitStream(500, 0)), BitStream(500, 0));
}

TEST(Scrambler, ImpulseRecurrence) {
  // Oracle: direct evaluation of out[i] = in[i] ^ out[i-43] on an array.
  BitStream in(200, 0);
  in[0] = 1;
  BitStream oracle(200, 0);
  for (std::size_t i = 0; i < in.size(); ++i) oracle[i] = in[i] ^ (i >= 43 ? oracle[i - 43] : 0);
  ScramblerState s;
  auto out = scramble(s, in);
  EXPECT_EQ(out, oracle);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i % 43 == 0 ? 1 : 0);
}

TEST(Scrambler, RoundTripAndZeroOverhead) {
  std::mt19937_64 rng(7);
  auto x = random_bits(rng, 10000);
  ScramblerState tx, rx;
  auto line = scramble(tx, x);
  EXPECT_EQ(line.size(), x.size());
  EXPECT_EQ(descramble(rx, line), x);
}

TEST(Scrambler, SelfSynchronizesWithin43Bits) {
  std::mt19937_64 rng(8);
  auto x = random_bits(rng, 2000);
  ScramblerState tx;
  auto line = scramble(tx, x);
  for (int trial = 0; trial < 50; ++trial) {
    ScramblerState wrong{rng() & kScramblerMask};
    auto out = descramble(wrong, line);
    for (std::size_t i = 43; i < out.size(); ++i) ASSERT_EQ(out[i], x[i]);
  }
}

TEST(Scrambler, LineErrorCorruptsTwoBits43Apart) {
  std::mt19937_64 rng(9);
  auto x = random_bits(rng, 1000);
  ScramblerState tx;
  auto line = scramble(tx, x);
  for (std::size_t pos : {0, 1, 100, 500, 900}) {
    auto bad = line;
    bad[pos] ^= 1u;
    ScramblerState a, b;
    auto good_out = descramble(a, line);
    auto bad_out = descramble(b, bad);
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (good_out[i] != bad_out[i]) diff.push_back(i);
    ASSERT_EQ(diff.size(), 2u);
    EXPECT_EQ(diff[0], pos);
    EXPECT_EQ(diff[1], pos + 43);
  }
}

TEST(Scrambler, OnesDensity) {
  std::mt19937_64 rng(10);
  auto x = random_bits(rng, 1000000);
  ScramblerState s;
  auto out = scramble(s, x);
  double density = static_cast<double>(popcount(out)) / out.size();
  EXPECT_NEAR(density, 0.5, 0.01);
}

TEST(Chains, IdleDownstreamEmitsGoldenPattern) {
  ChannelStreams idle{BitStream(200, 0), BitStream(100, 0), BitStream(100, 0)};
  auto symbols = downstream_tx(idle);
  ASSERT_EQ(symbols.size(), 800u);
  for (std::size_t i = 0; i < symbols.size(); ++i) ASSERT_EQ(symbols[i], kIdleSymbols[i % 8]);
}

TEST(Chains, DownstreamFullRoundTrip) {
  std::mt19937_64 rng(12);
  std::size_t idle_cycles = 8, data_cycles = 2000;
  auto sched = TdmSchedule::downstream();
  ChannelStreams s;
  for (auto ch : {Channel::A, Channel::B, Channel::C}) {
    s[ch] = BitStream(idle_cycles * sched.slots_per_cycle(ch), 0);
    auto data = random_bits(rng, data_cycles * sched.slots_per_cycle(ch));
    s[ch].insert(s[ch].end(), data.begin(), data.end());
  }
  auto symbols = downstream_tx(s);
  for (unsigned k = 0; k < 8; ++k) {
    BitView rx(symbols.data() + k, symbols.size() - k);
    auto sync = bit_slip_sync(rx.subspan(0, 8 * 6), 4);
    ASSERT_TRUE(sync.locked);
    ASSERT_EQ(sync.bit_slip_offset, k);
    auto out = downstream_rx(rx, sync);
    // Receiver starts at the first full cycle after its start position.
    std::size_t first_cycle = (k + 7) / 8;
    for (auto ch : {Channel::A, Channel::B, Channel::C}) {
      auto per = sched.slots_per_cycle(ch);
      BitStream expect(s[ch].begin() + static_cast<long>(first_cycle * per), s[ch].end());
      expect.resize(out[ch].size());
      EXPECT_EQ(out[ch], expect);
      EXPECT_GE(out[ch].size(), (data_cycles + idle_cycles - 1) * per);
    }
  }
}

TEST(Chains, StreamingDownstreamReceiverMatchesBatch) {
  std::mt19937_64 rng(13);
  auto sched = TdmSchedule::downstream();
  ChannelStreams s;
  for (auto ch : {Channel::A, Channel::B, Channel::C}) {
    s[ch] = BitStream(10 * sched.slots_per_cycle(ch), 0);
    auto data = random_bits(rng, 300 * sched.slots_per_cycle(ch));
    s[ch].insert(s[ch].end(), data.begin(), data.end());
  }
  auto symbols = downstream_tx(s);
  for (unsigned k = 0; k < 8; ++k) {
    DownstreamReceiver rx;
    ChannelStreams got;
    for (std::size_t i = k; i < symbols.size(); ++i)
      if (auto sb = rx.push(symbols[i])) got[sb->channel].push_back(sb->bit);
    EXPECT_EQ(rx.coding_violations(), 0u);
    // Locking takes 4 idle words; the first delivered slot is a cycle boundary.
    for (auto ch : {Channel::A, Channel::B, Channel::C}) {
      ASSERT_FALSE(got[ch].empty());
      BitStream tail(s[ch].end() - static_cast<long>(got[ch].size()), s[ch].end());
      EXPECT_EQ(got[ch], tail);
    }
  }
}

TEST(Chains, UpstreamFullRoundTrip) {
  std::mt19937_64 rng(14);
  auto sched = TdmSchedule::upstream();
  ChannelStreams s;
  for (auto ch : {Channel::A, Channel::B, Channel::C}) s[ch] = random_bits(rng, 5000 * sched.slots_per_cycle(ch));
  ScramblerState tx, rx;
  auto line = upstream_tx(s, tx);
  EXPECT_EQ(line.size(), 20000u);
  EXPECT_EQ(upstream_rx(line, rx), s);
}

TEST(Chains, StreamingUpstreamWithTraining) {
  std::mt19937_64 rng(15);
  UpstreamTransmitter tx(8);
  UpstreamReceiver rx(8);
  BitStream sent_training;
  for (int i = 0; i < 8; ++i) sent_training.push_back(tx.step(0));
  EXPECT_EQ(bits_to_string(sent_training), "10101010");
  // Receiver listens from before the link comes up.
  for (int i = 0; i < 5; ++i) EXPECT_FALSE(rx.push(0).has_value());
  for (Bit b : sent_training) EXPECT_FALSE(rx.push(b).has_value());
  EXPECT_TRUE(rx.trained());
  ChannelStreams sent, got;
  for (int i = 0; i < 4000; ++i) {
    auto ch = tx.next_channel();
    Bit d = static_cast<Bit>(rng() & 1u);
    sent[ch].push_back(d);
    auto sb = rx.push(tx.step(d));
    ASSERT_TRUE(sb.has_value());
    EXPECT_EQ(sb->channel, ch);
    got[ch].push_back(sb->bit);
  }
  EXPECT_EQ(got, sent);
}
