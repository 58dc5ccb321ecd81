#include <gtest/gtest.h>

#include <set>

#include "expunge/control_phase.hpp"
#include "expunge/hash.hpp"
#include "fixtures.hpp"

using namespace expunge;
using namespace expunge::testing;

namespace {

std::vector<SensorReading> readings_in(const EpochWindow& w, std::size_t n, std::size_t payload = 32) {
  std::vector<SensorReading> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_reading(mac(static_cast<unsigned>(i % 7)), w.bt() + i % w.delta(), payload));
  return out;
}

ControlKeys control_keys(const KeyRing& k) { return ControlKeys{k.enclave.public_key, k.shared_key}; }

}  // namespace

TEST(ReadingDigest, MatchesOracle) {
  auto d = reading_digest(as_bytes("02:00:00:00:00:01"), 3600000, 4);
  EXPECT_EQ(to_hex(d), "102cd7a66100cb78e4f6131f43e5cdb8744c15457fdef3aab3ac3e9536d67820");
}

TEST(ReadingDigest, EachFieldMatters) {
  auto base = reading_digest(as_bytes("02:00:00:00:00:01"), 10, 1);
  EXPECT_NE(base, reading_digest(as_bytes("02:00:00:00:00:02"), 10, 1));
  EXPECT_NE(base, reading_digest(as_bytes("02:00:00:00:00:01"), 11, 1));
  EXPECT_NE(base, reading_digest(as_bytes("02:00:00:00:00:01"), 10, 2));
}

TEST(EmptyEpochDigest, MatchesOracle) {
  EXPECT_EQ(to_hex(empty_epoch_digest(5)), "343aa4fac0c24e3c80c7e729ee542d6ee95e0cca2fb0c9af412e7464081ed0b8");
}

TEST(AccessibleTag, MatchesOracle) {
  Bytes seq(40);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<std::uint8_t>(i);
  std::vector<Bytes> cts{to_bytes("alpha"), Bytes{}, seq};
  EXPECT_EQ(to_hex(accessible_tag(cts)), "fe85e11a28270ee13639752d7f5ab359a24e8619e1f0de7e7becb488c596a63d");
}

TEST(AccessibleTag, LengthPrefixSeparatesBoundaries) {
  std::vector<Bytes> a{to_bytes("ab"), to_bytes("c")};
  std::vector<Bytes> b{to_bytes("a"), to_bytes("bc")};
  EXPECT_NE(accessible_tag(a), accessible_tag(b));
}

TEST(EpochTimestamp, ChainMatchesOracleOnToyParameters) {
  const auto& p = toy_params();
  auto dev = as_bytes("02:00:00:00:00:01");
  std::vector<Digest> e1{reading_digest(dev, 1, 1), reading_digest(dev, 1, 2)};
  auto ct1 = epoch_timestamp(p.seed(), e1, p);
  EXPECT_EQ(ct1.value(), BigInt(2843));
  std::vector<Digest> e2{reading_digest(dev, 2, 1)};
  EXPECT_EQ(epoch_timestamp(ct1, e2, p).value(), BigInt(2224));
  EXPECT_THROW(epoch_timestamp(p.seed(), std::vector<Digest>{}, p), Error);
}

TEST(BatchEpoch, PositionsFollowArrivalOrder) {
  EpochWindow w(1000, 1000);
  std::vector<SensorReading> rs{make_reading(mac(1), 1900), make_reading(mac(2), 1000), make_reading(mac(1), 1500)};
  auto batch = batch_epoch(rs, w);
  ASSERT_EQ(batch.size(), 3u);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(batch[i].position, i + 1);
    EXPECT_EQ(batch[i].reading, rs[i]);
  }
  rs.push_back(make_reading(mac(1), 2000));
  EXPECT_THROW(batch_epoch(rs, w), Error);
}

TEST(ReadingEncryption, RoundTripsAndBindsEpoch) {
  auto keys = KeyRing::generate();
  auto r = make_reading(mac(3), 4242, 100);
  auto ct = encrypt_reading(r, 4000, keys.enclave.public_key);
  EXPECT_EQ(ct.size(), reading_ciphertext_size(r.device_id.size(), r.payload.size()));
  EXPECT_EQ(ct.size(), encoded_size(r) + 8 + kSealOverhead);
  auto back = decrypt_reading(ct, keys.enclave);
  EXPECT_EQ(back.reading, r);
  EXPECT_EQ(back.epoch, 4000u);
  EXPECT_NE(ct, encrypt_reading(r, 4000, keys.enclave.public_key));
  ct[ct.size() / 2] ^= 1;
  EXPECT_THROW(decrypt_reading(ct, keys.enclave), Error);
}

TEST(MetaFields, RejectEpochReplay) {
  auto key = SymmetricKey::generate();
  auto sealed = seal_meta_field(key, 10, as_bytes("value"));
  EXPECT_EQ(open_meta_field(key, 10, sealed), to_bytes("value"));
  EXPECT_THROW(open_meta_field(key, 11, sealed), Error);
  auto other = SymmetricKey::generate();
  EXPECT_THROW(open_meta_field(other, 10, sealed), Error);
}

TEST(OutsourcePayload, RowsHaveExpectedStructure) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  EpochWindow w(3000, 1000);
  auto rs = readings_in(w, 5);
  auto payload = build_outsource_payload(w, rs, p.seed(), control_keys(keys), p);

  const auto& s = payload.sensor;
  EXPECT_EQ(s.epoch_id, w.id());
  ASSERT_EQ(s.digests.size(), 5u);
  ASSERT_EQ(s.ciphertexts.size(), 5u);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(s.digests[i], reading_digest(rs[i].device_id, w.id(), i + 1));
    EXPECT_EQ(decrypt_reading(s.ciphertexts[i], keys.enclave).reading, rs[i]);
  }
  EXPECT_EQ(s.crypto_time, epoch_timestamp(p.seed(), s.digests, p));

  const auto& m = payload.meta;
  EXPECT_EQ(m.window, w);
  auto ct_bytes = open_meta_field(keys.shared_key, w.id(), m.enc_crypto_time);
  EXPECT_EQ(AccumulatorValue::from_bytes(ct_bytes, p), s.crypto_time);
  EXPECT_EQ(decrypt_tag(keys.shared_key, w.id(), m.enc_accessible_tag), accessible_tag(s.ciphertexts));
  EXPECT_EQ(decrypt_tag(keys.shared_key, w.id(), m.enc_irrecoverable_tag), irrecoverable_tag(s.ciphertexts, w.id()));
}

TEST(OutsourcePayload, EmptyEpochUsesStandInDigest) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  EpochWindow w(0, 1000);
  auto payload = build_outsource_payload(w, {}, p.seed(), control_keys(keys), p);
  EXPECT_TRUE(payload.sensor.is_empty_epoch());
  ASSERT_EQ(payload.sensor.digests.size(), 1u);
  EXPECT_EQ(payload.sensor.digests[0], empty_epoch_digest(0));
  EXPECT_EQ(decrypt_tag(keys.shared_key, 0, payload.meta.enc_irrecoverable_tag), hash(ByteView{}));
}

TEST(OutsourcePayload, RejectsReadingsOutsideWindow) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  EpochWindow w(0, 1000);
  std::vector<SensorReading> rs{make_reading(mac(1), 1000)};
  EXPECT_THROW(build_outsource_payload(w, rs, p.seed(), control_keys(keys), p), Error);
}

TEST(OutsourcePayload, RowsRoundTripThroughEncoding) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  EpochWindow w(0, 1000);
  auto payload = build_outsource_payload(w, readings_in(w, 3), p.seed(), control_keys(keys), p);
  auto s = decode_sensor_row(encode(payload.sensor, p), p);
  EXPECT_EQ(s.epoch_id, payload.sensor.epoch_id);
  EXPECT_EQ(s.digests, payload.sensor.digests);
  EXPECT_EQ(s.crypto_time, payload.sensor.crypto_time);
  EXPECT_EQ(s.ciphertexts, payload.sensor.ciphertexts);
  auto m = decode_meta_row(encode(payload.meta));
  EXPECT_EQ(m.window, payload.meta.window);
  EXPECT_EQ(m.enc_crypto_time, payload.meta.enc_crypto_time);
  EXPECT_EQ(m.enc_accessible_tag, payload.meta.enc_accessible_tag);
  EXPECT_EQ(m.enc_irrecoverable_tag, payload.meta.enc_irrecoverable_tag);
}

TEST(ControlPhase, ChainsTimestampsAcrossEpochs) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  ControlPhase control(p, control_keys(keys));
  EpochWindow w1(0, 1000);
  auto a = control.process(w1, readings_in(w1, 2));
  auto b = control.process(w1.next(), readings_in(w1.next(), 3));
  EXPECT_EQ(a.sensor.crypto_time, epoch_timestamp(p.seed(), a.sensor.digests, p));
  EXPECT_EQ(b.sensor.crypto_time, epoch_timestamp(a.sensor.crypto_time, b.sensor.digests, p));
  EXPECT_EQ(control.last_crypto_time(), b.sensor.crypto_time);
  EXPECT_EQ(control.last_epoch(), w1.next().id());
  EXPECT_THROW(control.process(w1, readings_in(w1, 1)), Error);
}

TEST(ControlPhase, TagsDifferAcrossManyEpochs) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  ControlPhase control(p, control_keys(keys));
  EpochWindow w(0, 1000);
  std::set<Digest> seen;
  for (int i = 0; i < 1000; ++i, w = w.next()) {
    auto payload = control.process(w, readings_in(w, 1 + i % 3, 16));
    auto a = decrypt_tag(keys.shared_key, w.id(), payload.meta.enc_accessible_tag);
    auto ir = decrypt_tag(keys.shared_key, w.id(), payload.meta.enc_irrecoverable_tag);
    ASSERT_NE(a, ir);
    seen.insert(a);
    seen.insert(ir);
  }
  EXPECT_EQ(seen.size(), 2000u);
}

TEST(ControlPhase, DigestsDoNotDependOnPayload) {
  const auto& p = params512();
  auto keys = KeyRing::generate();
  EpochWindow w(0, 1000);
  auto rs = readings_in(w, 4);
  auto first = build_outsource_payload(w, rs, p.seed(), control_keys(keys), p);
  for (auto& r : rs) r.payload.push_back(0x55);
  auto second = build_outsource_payload(w, rs, p.seed(), control_keys(keys), p);
  EXPECT_EQ(first.sensor.digests, second.sensor.digests);
  EXPECT_EQ(first.sensor.crypto_time, second.sensor.crypto_time);
}
