#include <gtest/gtest.h>

#include <random>

#include "expunge/accumulator.hpp"
#include "expunge/control_phase.hpp"
#include "fixtures.hpp"

using namespace expunge;
using namespace expunge::testing;

TEST(Accumulator, HandValueOnToyParameters) {
  const auto& p = toy_params();
  auto v = step(step(p.seed(), Exponent::raw(BigInt(3)), p), Exponent::raw(BigInt(5)), p);
  EXPECT_EQ(v.value(), BigInt(438));
}

TEST(Accumulator, QuasiCommutativeOnToyParameters) {
  const auto& p = toy_params();
  for (std::uint64_t a = 1; a < 40; ++a)
    for (std::uint64_t b = 1; b < 40; b += 3) {
      auto ab = step(step(p.seed(), Exponent::raw(BigInt(a)), p), Exponent::raw(BigInt(b)), p);
      auto ba = step(step(p.seed(), Exponent::raw(BigInt(b)), p), Exponent::raw(BigInt(a)), p);
      ASSERT_EQ(ab, ba);
    }
}

TEST(Accumulator, SetupProducesModulusOfRequestedSize) {
  EXPECT_EQ(params512().modulus().bits(), 512);
  EXPECT_EQ(params512().modulus_bits(), 512);
  EXPECT_EQ(params2048().modulus().bits(), 2048);
  EXPECT_EQ(params2048().value_width(), 256u);
  EXPECT_TRUE(gcd(params2048().seed().value(), params2048().modulus()) == BigInt(1));
}

TEST(Accumulator, SetupRejectsWeakSizes) {
  EXPECT_THROW(AccumulatorParams::setup(256), Error);
  EXPECT_THROW(AccumulatorParams::setup(513), Error);
}

TEST(Exponent, DigestIsForcedOddAndZeroIsRejected) {
  Digest even{};
  even[31] = 0x10;
  auto e = Exponent::from_digest(even);
  EXPECT_TRUE(e.value().is_odd());
  EXPECT_THROW(Exponent::raw(BigInt(0)), Error);
  EXPECT_THROW(Exponent::from_digest(ByteView{}), Error);
}

TEST(AccumulatorValue, RangeChecked) {
  const auto& p = toy_params();
  EXPECT_THROW(AccumulatorValue(BigInt(0), p), Error);
  EXPECT_THROW(AccumulatorValue(BigInt(3233), p), Error);
  EXPECT_NO_THROW(AccumulatorValue(BigInt(3232), p));
}

TEST(AccumulatorValue, FixedWidthBytesRoundTrip) {
  const auto& p = params512();
  auto v = step(p.seed(), as_bytes("abc"), p);
  auto b = v.to_bytes(p);
  EXPECT_EQ(b.size(), 64u);
  EXPECT_EQ(AccumulatorValue::from_bytes(b, p), v);
  b.pop_back();
  EXPECT_THROW(AccumulatorValue::from_bytes(b, p), Error);
}

TEST(AccumulatorParams, PublicEncodingRoundTripsAndValidates) {
  const auto& p = params512();
  auto back = decode_params(encode(p));
  EXPECT_EQ(back, p);
  EXPECT_THROW(AccumulatorParams::from_public(512, p.modulus(), BigInt(1)), Error);
  EXPECT_THROW(AccumulatorParams::from_public(514, p.modulus(), p.seed().value()), Error);
}

TEST(VerifyStep, AcceptsHonestAndRejectsWrongValues) {
  const auto& p = params512();
  auto v = step(p.seed(), as_bytes("epoch"), p);
  EXPECT_TRUE(verify_step(p.seed(), as_bytes("epoch"), v, p));
  EXPECT_FALSE(verify_step(p.seed(), as_bytes("epocH"), v, p));
  EXPECT_FALSE(verify_step(p.seed(), ByteView{}, v, p));
}

TEST(VerifyStep, SwappedDigestListIsRejected) {
  const auto& p = params512();
  std::mt19937_64 rng(7);
  int accepted = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Digest> ds(2 + rng() % 6);
    for (auto& d : ds)
      for (auto& b : d) b = static_cast<std::uint8_t>(rng());
    auto honest = step(p.seed(), digest_list_hash(ds), p);
    auto i = rng() % ds.size();
    auto j = (i + 1 + rng() % (ds.size() - 1)) % ds.size();
    std::swap(ds[i], ds[j]);
    if (verify_step(p.seed(), digest_list_hash(ds), honest, p)) ++accepted;
  }
  EXPECT_EQ(accepted, 0);
}
