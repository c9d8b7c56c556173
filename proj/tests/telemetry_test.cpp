#include <gtest/gtest.h>

#include <random>

#include "ranop/telemetry.hpp"
#include "support.hpp"

using namespace ranop;

namespace {

// Reference FNV-1a, written independently of the library.
std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST(Quantize, ClipThenRound) {
  const ClipRange r{-30.0, 60.0};
  EXPECT_EQ(quantize(12.345, 2, r), "12.35");
  EXPECT_EQ(quantize(12.344, 2, r), "12.34");
  EXPECT_EQ(quantize(-0.04, 1, r), "0.0");
  EXPECT_EQ(quantize(-0.06, 1, r), "-0.1");
  EXPECT_EQ(quantize(0.05, 2, r), "0.05");
  EXPECT_EQ(quantize(1e9, 1, r), "60.0");
  EXPECT_EQ(quantize(-1e9, 0, r), "-30");
  EXPECT_EQ(quantize(std::nan(""), 1, r), "-30.0");
  EXPECT_EQ(quantize(7.0, 0, r), "7");
  EXPECT_EQ(quantize(0.0, 2, r), "0.00");
}

TEST(Spec, DefaultsValid) {
  EXPECT_TRUE(QuantizationSpec{}.valid());
  QuantizationSpec bad;
  bad.queue_decimals = -1;
  EXPECT_FALSE(bad.valid());
  bad = {};
  bad.sinr_db_clip = {5.0, 5.0};
  EXPECT_FALSE(bad.valid());
}

TEST(Tokenize, LayoutForTwoByTwo) {
  const auto s = ranop::testing::two_by_two();
  const auto ctx = tokenize_state(initial_state(s), s);
  const std::vector<std::string> expect{
      "<STATE>", "<CSI>", "-90.00", "-100.00", "-96.99", "-83.98", "</CSI>", "<QUEUES>", "1000", "3000",
      "</QUEUES>", "<CONFIG>", "cell_1=30.0dBm", "cell_2=40.0dBm", "carrier_1=on", "carrier_2=on", "</CONFIG>",
      "<SINR>", "0.0", "23.0", "</SINR>", "</STATE>"};
  EXPECT_EQ(ctx.tokens, expect);
  EXPECT_TRUE(well_framed(ctx.tokens));
  EXPECT_EQ(ctx.digest, digest(ctx));
}

TEST(Tokenize, Deterministic) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto s = ranop::testing::random_scenario(seed);
    const auto a = tokenize_state(initial_state(s), s);
    const auto b = tokenize_state(initial_state(s), s);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.digest, b.digest);
  }
}

TEST(Tokenize, SubResolutionCollapses) {
  const auto s = ranop::testing::two_by_two();
  RanState a = initial_state(s);
  RanState b = a;
  b.queues.bits[0] += 0.3;
  b.config.powers_dbm[0] += 0.02;
  refresh_interference(b, s);
  EXPECT_EQ(tokenize_state(a, s).tokens, tokenize_state(b, s).tokens);
}

TEST(Tokenize, RoundingBoundaryIsDiscontinuous) {
  const auto s = ranop::testing::two_by_two();
  RanState a = initial_state(s);
  RanState b = a;
  a.queues.bits[0] = 1000.4999;
  b.queues.bits[0] = 1000.5001;
  EXPECT_NE(tokenize_state(a, s).tokens, tokenize_state(b, s).tokens);
}

TEST(Framing, Rejections) {
  const auto s = ranop::testing::two_by_two();
  const auto ok = tokenize_state(initial_state(s), s).tokens;
  auto swapped = ok;
  std::swap(swapped[1], swapped[7]);
  EXPECT_FALSE(well_framed(swapped));
  auto unclosed = ok;
  unclosed.erase(unclosed.begin() + 6);
  EXPECT_FALSE(well_framed(unclosed));
  EXPECT_FALSE(well_framed({}));
  auto stray = ok;
  stray.insert(stray.begin() + 1, "42");
  EXPECT_FALSE(well_framed(stray));
}

TEST(Digest, MatchesReferenceFnv) {
  EXPECT_EQ(digest_tokens(std::vector<std::string>{}), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  const std::vector<std::string> toks{"<STATE>", "1.5", "cell_1=3.0dBm"};
  EXPECT_EQ(digest_tokens(toks), fnv1a_hex("<STATE>\x1f" "1.5\x1f" "cell_1=3.0dBm\x1f"));
  // The separator keeps token boundaries distinct.
  EXPECT_NE(digest_tokens(std::vector<std::string>{"ab", "c"}), digest_tokens(std::vector<std::string>{"a", "bc"}));
}

TEST(Digest, StateDigestIgnoresTick) {
  const auto s = ranop::testing::two_by_two();
  RanState a = initial_state(s);
  RanState b = a;
  b.tick = 99;
  EXPECT_EQ(state_digest(a), state_digest(b));
  b.queues.bits[1] += 1e-9;
  EXPECT_NE(state_digest(a), state_digest(b));
}

TEST(Summary, TrailingWindow) {
  std::vector<KpiVector> h{{1, 10, 100}, {2, 20, 200}, {3, 30, 300}, {6, 0, 50}};
  auto agg = kpi_summary(h, 3);
  EXPECT_FALSE(agg.empty);
  EXPECT_EQ(agg.count, 3u);
  EXPECT_DOUBLE_EQ(agg.mean.throughput, 11.0 / 3.0);
  EXPECT_DOUBLE_EQ(agg.min.latency, 0.0);
  EXPECT_DOUBLE_EQ(agg.max.energy, 300.0);
  EXPECT_EQ(kpi_summary(h, 10).count, 4u);
  EXPECT_TRUE(kpi_summary({}, 3).empty);
  EXPECT_TRUE(kpi_summary(h, 0).empty);
}
