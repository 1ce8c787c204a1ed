#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "asymnet/sim/vectors.hpp"

using namespace asymnet;
using namespace asymnet::sim;

namespace {

std::string shipped() {
  std::ifstream in(std::string(ASYMNET_SOURCE_DIR) + "/vectors/golden.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Vectors, FrozenLiterals) {
  auto v = golden_vectors();
  // idle fanout cycle and its Manchester image
  EXPECT_EQ(format_vector(v[0]), "down 4:0 8:65 fanout");
  EXPECT_EQ(format_vector(v[1]), "down 4:4 8:65 manchester");
  // scrambler impulse: ones every 43 bits
  auto imp = std::find_if(v.begin(), v.end(), [](auto& x) { return x.op == "scramble"; });
  ASSERT_NE(imp, v.end());
  std::vector<std::size_t> ones;
  for (std::size_t i = 0; i < imp->output.size(); ++i)
    if (imp->output[i]) ones.push_back(i);
  EXPECT_EQ(ones, (std::vector<std::size_t>{0, 43, 86, 129}));
  auto des = std::find_if(v.begin(), v.end(), [](auto& x) { return x.op == "descramble"; });
  ASSERT_NE(des, v.end());
  EXPECT_EQ(popcount(des->output), 2u);
  EXPECT_EQ(des->output[43], 1);
}

TEST(Vectors, EveryMessageTypeCovered) {
  std::set<std::string> kinds;
  for (auto& v : golden_vectors()) kinds.insert(v.direction + "." + v.op);
  for (auto k : {"down.fanout", "up.uplink", "up.scramble", "up.descramble", "down.chA", "up.chA", "down.chB", "up.chB",
                 "down.chC", "up.fragment"})
    EXPECT_TRUE(kinds.count(k)) << k;
}

TEST(Vectors, GeneratedSetChecksAndParsesBack) {
  for (auto& v : golden_vectors()) {
    EXPECT_EQ(check_vector(v), std::nullopt) << format_vector(v);
    auto p = parse_vector_line(format_vector(v));
    EXPECT_EQ(format_vector(p), format_vector(v));
  }
}

TEST(Vectors, ShippedFileMatchesAndVerifies) {
  auto text = shipped();
  EXPECT_EQ(text, emit_vectors());
  std::istringstream in(text);
  auto r = verify_vectors(in);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.total, golden_vectors().size());
}

TEST(Vectors, TamperingDetected) {
  for (auto& v : golden_vectors()) {
    auto bad = v;
    bad.output.back() ^= 1u;
    EXPECT_NE(check_vector(bad), std::nullopt) << format_vector(v);
    if (!v.fields.empty()) {
      auto f = v;
      f.fields.pop_back();
      EXPECT_NE(check_vector(f), std::nullopt) << format_vector(v);
    }
  }
  std::istringstream junk("down 4:0 8:65\nup zz 8:65 fanout\n\n# comment\n");
  auto r = verify_vectors(junk);
  EXPECT_EQ(r.total, 2u);
  EXPECT_EQ(r.failures.size(), 2u);
}
