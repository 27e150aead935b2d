#include "tubalcast/mask.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tubalcast/error.hpp"

namespace tubalcast {
namespace {

TEST(ApplyMask, FullAndEmpty) {
  std::mt19937_64 rng(1);
  const Tensor3 t = oracle::random_tensor({3, 4, 5}, rng);
  EXPECT_EQ(apply_mask(t, ObservationMask::full(t.dims())), t);
  EXPECT_EQ(apply_mask(t, ObservationMask(t.dims())).frobenius_norm(), 0.0);
}

TEST(ApplyMask, MatchesElementwiseLoopAndIsIdempotent) {
  std::mt19937_64 rng(2);
  const Tensor3 t = oracle::random_tensor({4, 3, 6}, rng);
  const ObservationMask m = random_mask(t.dims(), 0.4, 0, 99);
  const Tensor3 out = apply_mask(t, m);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(out(i, j, k), (m.observed(i, j, k) ? 1.0 : 0.0) * t(i, j, k));
  EXPECT_EQ(apply_mask(out, m), out);
}

TEST(ApplyMask, DimMismatch) {
  EXPECT_THROW(apply_mask(Tensor3({2, 2, 2}), ObservationMask({2, 2, 3})), Error);
}

TEST(RandomMask, NoMissingProtectsForecastSlice) {
  const ObservationMask m = random_mask({12, 12, 11}, 0.0, 1, 5);
  EXPECT_EQ(m.omega_size(), 12U * 12U * 10U);
  EXPECT_EQ(m.observed_in_slice(10), 0U);
  EXPECT_EQ(m.trailing_unobserved_slices(), 1U);
}

TEST(RandomMask, AllMissing) { EXPECT_EQ(random_mask({12, 12, 11}, 1.0, 1, 5).omega_size(), 0U); }

TEST(RandomMask, BinomialConcentration) {
  // 1440 historical entries at rate 0.5: mean 720, sigma = sqrt(360).
  const double sigma = std::sqrt(1440 * 0.25);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ObservationMask m = random_mask({12, 12, 11}, 0.5, 1, seed);
    EXPECT_LT(std::abs(static_cast<double>(m.omega_size()) - 720.0), 3 * sigma);
    EXPECT_EQ(m.observed_in_slice(10), 0U);
  }
}

TEST(RandomMask, DeterministicUnderSeed) {
  EXPECT_EQ(random_mask({5, 6, 7}, 0.3, 2, 42), random_mask({5, 6, 7}, 0.3, 2, 42));
  EXPECT_NE(random_mask({5, 6, 7}, 0.3, 2, 42), random_mask({5, 6, 7}, 0.3, 2, 43));
}

TEST(RandomMask, InvalidRate) {
  try {
    (void)random_mask({2, 2, 2}, 1.5, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidRate);
  }
  EXPECT_THROW(random_mask({2, 2, 2}, -0.1, 0, 1), Error);
}

TEST(M3F, RoundTripPreservesBits) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ObservationMask m = random_mask({3, 5, 7}, 0.5, 1, seed);
    std::stringstream ss;
    write_m3f(ss, m);
    EXPECT_EQ(ss.str().size(), 4U + 24U + (105U + 7U) / 8U);
    EXPECT_EQ(read_m3f(ss), m);
  }
}

TEST(M3F, BadMagic) {
  std::stringstream ss("T3F1xxxxxxxxxxxxxxxxxxxxxxxx");
  EXPECT_THROW(read_m3f(ss), Error);
}

TEST(T3F, ByteLayoutAndRoundTrip) {
  const Tensor3 t({1, 2, 1}, {1.5, -2.0});
  std::stringstream ss;
  write_t3f(ss, t);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4U + 24U + 16U);
  EXPECT_EQ(bytes.substr(0, 4), "T3F1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2U);  // n2, little-endian
  // 1.5 = 0x3FF8000000000000, least significant byte first
  EXPECT_EQ(static_cast<unsigned char>(bytes[28 + 7]), 0x3FU);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28 + 6]), 0xF8U);
  EXPECT_EQ(read_t3f(ss), t);
}

TEST(T3F, TruncatedPayload) {
  std::stringstream ss;
  write_t3f(ss, Tensor3({2, 2, 2}, 1.0));
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_t3f(cut), Error);
}

}  // namespace
}  // namespace tubalcast
