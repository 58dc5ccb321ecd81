#include <gtest/gtest.h>

#include <fstream>

#include "expunge/cloud_store.hpp"
#include "expunge/hash.hpp"
#include "fixtures.hpp"

using namespace expunge;
using namespace expunge::testing;

namespace {

std::vector<SensorReading> readings_in(const EpochWindow& w, std::size_t n) {
  std::vector<SensorReading> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_reading(mac(static_cast<unsigned>(i)), w.bt() + i));
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(CloudStore, FollowsRetentionTimeline) {
  // Epochs of one unit; P_del = 2, P_ver = 4.
  Protocol proto(params512(), 2, 4, 1000);
  EpochWindow t1(1000, 1000), t2(2000, 1000);
  proto.outsource(t1, readings_in(t1, 3));
  proto.outsource(t2, readings_in(t2, 2));
  auto& store = proto.store;

  auto r = store.tick(3000);
  EXPECT_TRUE(r.transitions.empty());
  EXPECT_EQ(store.record(t1.id())->state, DataState::Accessible);

  r = store.tick(4000);
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_EQ(r.transitions[0], (StateTransition{t1.id(), DataState::Accessible, DataState::Irrecoverable, 4000}));
  EXPECT_EQ(store.record(t2.id())->state, DataState::Accessible);

  r = store.tick(5000);
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_EQ(r.transitions[0].epoch, t2.id());

  r = store.tick(6000);
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_EQ(r.transitions[0], (StateTransition{t1.id(), DataState::Irrecoverable, DataState::Purged, 6000}));

  store.tick(7000);
  EXPECT_EQ(store.record(t2.id())->state, DataState::Purged);
  auto hist = store.record(t1.id())->history;
  ASSERT_EQ(hist.size(), 3u);
  EXPECT_EQ(hist[1], std::make_pair(DataState::Irrecoverable, Time{4000}));
  EXPECT_EQ(hist[2], std::make_pair(DataState::Purged, Time{6000}));
}

TEST(CloudStore, TickCatchesUpOverSkippedStates) {
  Protocol proto(params512(), 2, 4, 1000);
  EpochWindow t1(1000, 1000);
  proto.outsource(t1, readings_in(t1, 2));
  auto r = proto.store.tick(100000);
  ASSERT_EQ(r.transitions.size(), 2u);
  EXPECT_EQ(r.transitions[0].to, DataState::Irrecoverable);
  EXPECT_EQ(r.transitions[1].to, DataState::Purged);
  EXPECT_THROW(proto.store.tick(99999), Error);
}

TEST(CloudStore, RejectsDuplicateAndOutOfOrderEpochs) {
  Protocol proto(params512());
  EpochWindow t1(1000, 1000);
  auto p1 = proto.control.process(t1, readings_in(t1, 1));
  auto p2 = proto.control.process(t1.next(), readings_in(t1.next(), 1));
  proto.store.ingest(p2);
  EXPECT_EQ(code_of([&] { proto.store.ingest(p2); }), ErrorCode::Duplicate);
  EXPECT_EQ(code_of([&] { proto.store.ingest(p1); }), ErrorCode::Inconsistent);
}

TEST(CloudStore, RejectsInconsistentRows) {
  Protocol proto(params512());
  EpochWindow t1(1000, 1000);
  auto p = proto.control.process(t1, readings_in(t1, 2));
  auto mismatched = p;
  mismatched.meta.window = EpochWindow(5000, 1000);
  EXPECT_EQ(code_of([&] { proto.store.ingest(mismatched); }), ErrorCode::Inconsistent);
  auto short_digests = p;
  short_digests.sensor.digests.pop_back();
  EXPECT_EQ(code_of([&] { proto.store.ingest(short_digests); }), ErrorCode::Inconsistent);
  auto wrong_delta = p;
  wrong_delta.meta.window = EpochWindow(1000, 500);
  EXPECT_EQ(code_of([&] { proto.store.ingest(wrong_delta); }), ErrorCode::Inconsistent);
}

TEST(CloudStore, ServesOnlyAuthorisedProvidersWhileAccessible) {
  Protocol proto(params512(), 2, 4, 1000);
  EpochWindow t1(1000, 1000);
  auto p = proto.outsource(t1, readings_in(t1, 2));
  EXPECT_EQ(proto.store.fetch_for_sp("sp-1", t1.id(), 2000), p.sensor.ciphertexts);
  EXPECT_EQ(code_of([&] { proto.store.fetch_for_sp("sp-9", t1.id(), 2000); }), ErrorCode::Unauthorized);
  EXPECT_EQ(code_of([&] { proto.store.fetch_for_sp("sp-1", t1.id(), 4000); }), ErrorCode::Expired);
  EXPECT_EQ(code_of([&] { proto.store.fetch_for_sp("sp-1", 77, 2000); }), ErrorCode::NotFound);
}

TEST(CloudStore, BundlesFollowState) {
  Protocol proto(params512(), 2, 4, 1000);
  EpochWindow t1(1000, 1000);
  auto p = proto.outsource(t1, readings_in(t1, 3));
  auto b = proto.store.fetch_bundle(1500, 2000);
  EXPECT_EQ(b.state, DataState::Accessible);
  EXPECT_EQ(b.window, t1);
  EXPECT_EQ(b.ciphertexts, p.sensor.ciphertexts);
  EXPECT_FALSE(b.prev_crypto_time.has_value());
  EXPECT_EQ(b.served_at, 2000u);

  proto.store.tick(4000);
  auto ib = proto.store.fetch_bundle(1500, 4000);
  EXPECT_EQ(ib.state, DataState::Irrecoverable);
  EXPECT_TRUE(ib.ciphertexts.empty());
  EXPECT_FALSE(ib.cells.has_value());
  ASSERT_TRUE(ib.deletion_proof.has_value());
  auto with_cells = proto.store.fetch_bundle(1500, 4000, true);
  ASSERT_TRUE(with_cells.cells.has_value());
  EXPECT_EQ(proof_digest(*with_cells.cells), ib.deletion_proof->proof);

  proto.store.tick(6000);
  EXPECT_EQ(code_of([&] { proto.store.fetch_bundle(1500, 6000); }), ErrorCode::Unavailable);
  EXPECT_EQ(code_of([&] { proto.store.fetch_bundle(9000, 6000); }), ErrorCode::NotFound);
}

TEST(CloudStore, StoredProofEqualsIrrecoverableTagOfOriginals) {
  Protocol proto(params512(), 1, std::nullopt, 1000);
  EpochWindow w(0, 1000);
  for (int i = 0; i < 5; ++i, w = w.next()) proto.outsource(w, readings_in(w, static_cast<std::size_t>(i)));
  proto.store.tick(6000);
  for (auto id : proto.store.epochs()) {
    auto rec = proto.store.record(id);
    ASSERT_EQ(rec->state, DataState::Irrecoverable);
    ASSERT_TRUE(rec->deletion_proof);
    EXPECT_TRUE(rec->ciphertexts.empty());
    EXPECT_EQ(rec->deletion_proof->proof, irrecoverable_tag(proto.store.shadow_ciphertexts(id), id));
    EXPECT_EQ(rec->deletion_proof->produced_at, 6000u);
  }
}

TEST(CloudStore, LazyCloudKeepsDataAndRecomputesOnDemand) {
  Protocol proto(params512(), 2, 4, 1000, true);
  EpochWindow t1(1000, 1000);
  proto.outsource(t1, readings_in(t1, 4));
  proto.store.tick(4000);
  auto rec = proto.store.record(t1.id());
  EXPECT_EQ(rec->state, DataState::Irrecoverable);
  EXPECT_TRUE(rec->lazy_pending);
  EXPECT_EQ(rec->ciphertexts.size(), 4u);
  EXPECT_FALSE(rec->deletion_proof.has_value());
  EXPECT_EQ(code_of([&] { proto.store.fetch_for_sp("sp-1", t1.id(), 4000); }), ErrorCode::Expired);

  auto b = proto.store.fetch_bundle(1000, 4500);
  ASSERT_TRUE(b.deletion_proof);
  EXPECT_EQ(b.deletion_proof->produced_at, 4500u);
  EXPECT_EQ(b.deletion_proof->proof, irrecoverable_tag(rec->ciphertexts, t1.id()));
}

TEST(CloudStore, SurvivesRestart) {
  TempDir dir;
  auto keys = KeyRing::generate();
  const auto& params = params512();
  RetentionPolicy policy(2, 4, 1000);
  CloudConfig cfg{policy, params, {"sp-1"}, dir.path(), false, false};
  ControlPhase control(params, ControlKeys{keys.enclave.public_key, keys.shared_key});
  std::vector<OutsourcePayload> sent;
  {
    CloudStore store(cfg);
    EpochWindow w(0, 1000);
    for (int i = 0; i < 4; ++i, w = w.next()) {
      sent.push_back(control.process(w, readings_in(w, static_cast<std::size_t>(i + 1))));
      store.ingest(sent.back());
    }
    store.tick(3000);
  }
  CloudStore reloaded(cfg);
  EXPECT_EQ(reloaded.epochs().size(), 4u);
  EXPECT_EQ(reloaded.last_tick(), 3000u);
  auto rec0 = reloaded.record(0);
  EXPECT_EQ(rec0->state, DataState::Irrecoverable);
  EXPECT_EQ(rec0->deletion_proof->proof, irrecoverable_tag(sent[0].sensor.ciphertexts, 0));
  ASSERT_TRUE(rec0->cells.has_value());
  EXPECT_EQ(proof_digest(*rec0->cells), rec0->deletion_proof->proof);
  auto rec3 = reloaded.record(3000);
  EXPECT_EQ(rec3->state, DataState::Accessible);
  EXPECT_EQ(rec3->ciphertexts, sent[3].sensor.ciphertexts);
  EXPECT_EQ(rec3->prev_crypto_time, sent[2].sensor.crypto_time);
  EXPECT_EQ(reloaded.outsourced_bytes() > 0, true);

  // Nothing of an expunged epoch's ciphertexts survives in its segment file.
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), {});
    for (const auto& ct : sent[0].sensor.ciphertexts)
      EXPECT_EQ(data.find(std::string(ct.begin(), ct.end())), std::string::npos) << entry.path();
  }

  reloaded.tick(5000);
  CloudStore again(cfg);
  EXPECT_EQ(again.record(0)->state, DataState::Purged);
}

TEST(CloudStore, StorageOverheadForDailyEpochs) {
  Protocol proto(params512(), 2, std::nullopt, 1000);
  EpochWindow w(0, 1000);
  std::size_t raw = 0;
  for (int day = 0; day < 365; ++day, w = w.next()) {
    auto rs = readings_in(w, 50);
    for (auto& r : rs) {
      r.payload.resize(256, 'x');
      raw += encode(r).size();
    }
    proto.outsource(w, rs);
  }
  auto ratio = static_cast<double>(proto.store.outsourced_bytes()) / static_cast<double>(raw);
  EXPECT_GT(ratio, 1.0);
  EXPECT_LE(ratio, 1.5);
}
