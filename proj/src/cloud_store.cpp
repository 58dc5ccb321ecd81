#include "expunge/cloud_store.hpp"

#include <fstream>
#include <mutex>
#include <string>

#include <fmt/format.h>

#include "expunge/hash.hpp"
#include "file_io.hpp"

namespace expunge {

namespace {

constexpr std::size_t kFixedHeaderSize = 81;
constexpr std::size_t kMaxHistory = 3;
constexpr std::uint8_t kFlagProof = 0x01;
constexpr std::uint8_t kFlagLazy = 0x02;

enum class PayloadKind : std::uint8_t { None = 0, Ciphertexts = 1, Cells = 2 };

Bytes fixed_header(const EpochRecord& rec, std::uint64_t payload_offset) {
  canonical::Writer w(canonical::Tag::EpochSegment);
  w.u8(static_cast<std::uint8_t>(rec.state));
  std::uint8_t flags = 0;
  if (rec.deletion_proof) flags |= kFlagProof;
  if (rec.lazy_pending) flags |= kFlagLazy;
  w.u8(flags);
  w.digest(rec.deletion_proof ? rec.deletion_proof->proof : Digest{});
  w.u64(rec.deletion_proof ? rec.deletion_proof->produced_at : 0);
  w.u8(static_cast<std::uint8_t>(rec.history.size()));
  for (std::size_t i = 0; i < kMaxHistory; ++i) {
    if (i < rec.history.size()) w.u8(static_cast<std::uint8_t>(rec.history[i].first)).u64(rec.history[i].second);
    else w.u8(0).u64(0);
  }
  w.u64(payload_offset);
  return std::move(w).take();
}

Bytes payload_region(const EpochRecord& rec) {
  canonical::Writer w;
  if (rec.cells) {
    w.u8(static_cast<std::uint8_t>(PayloadKind::Cells));
    write(w, *rec.cells);
  } else if (!rec.ciphertexts.empty()) {
    w.u8(static_cast<std::uint8_t>(PayloadKind::Ciphertexts));
    w.u32(static_cast<std::uint32_t>(rec.ciphertexts.size()));
    for (const auto& c : rec.ciphertexts) w.bytes(c);
  } else {
    w.u8(static_cast<std::uint8_t>(PayloadKind::None));
  }
  return std::move(w).take();
}

Bytes encode_segment(const EpochRecord& rec, const AccumulatorParams& params) {
  canonical::Writer body;
  write(body, rec.window);
  body.u64(rec.outsourced_bytes);
  body.boolean(rec.meta.has_value());
  if (rec.meta) write(body, *rec.meta);
  body.boolean(rec.crypto_time.has_value());
  if (rec.crypto_time) body.bytes(rec.crypto_time->to_bytes(params));
  body.boolean(rec.prev_crypto_time.has_value());
  if (rec.prev_crypto_time) body.bytes(rec.prev_crypto_time->to_bytes(params));
  body.u32(static_cast<std::uint32_t>(rec.digests.size()));
  for (const auto& d : rec.digests) body.digest(d);

  const std::uint64_t payload_offset = kFixedHeaderSize + body.size();
  Bytes out = fixed_header(rec, payload_offset);
  append(out, body.view());
  append(out, payload_region(rec));
  return out;
}

std::uint64_t payload_offset_of(ByteView segment) {
  canonical::Reader r(segment.subspan(kFixedHeaderSize - 8, 8));
  return r.u64();
}

}  // namespace

CloudStore::CloudStore(CloudConfig config) : config_(std::move(config)) {
  if (!config_.directory) return;
  std::filesystem::create_directories(*config_.directory);
  auto index = *config_.directory / "index";
  if (!std::filesystem::exists(index)) return;
  std::ifstream in(index);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto id = static_cast<EpochId>(std::stoull(line));
    auto rec = load_segment(segment_path(id));
    records_.emplace(id, std::move(rec));
  }
  auto clock = *config_.directory / "last_tick";
  if (std::filesystem::exists(clock)) {
    std::ifstream c(clock);
    c >> last_tick_;
  }
}

std::filesystem::path CloudStore::segment_path(EpochId epoch) const {
  return *config_.directory / fmt::format("epoch-{:020}.seg", epoch);
}

EpochRecord CloudStore::load_segment(const std::filesystem::path& path) const {
  auto data = detail::read_file(path);
  canonical::Reader r(data);
  r.expect_header(canonical::Tag::EpochSegment);
  auto state = parse_data_state(r.u8());
  if (!state) throw Error(ErrorCode::Encoding, "segment has invalid state");
  auto flags = r.u8();
  auto proof_digest = r.digest();
  auto produced_at = r.u64();
  auto nhist = r.u8();
  std::vector<std::pair<DataState, Time>> history;
  for (std::size_t i = 0; i < kMaxHistory; ++i) {
    auto s = r.u8();
    auto t = r.u64();
    if (i < nhist) history.emplace_back(static_cast<DataState>(s), t);
  }
  r.u64();  // payload offset
  auto window = read_window(r);
  EpochRecord rec{window};
  rec.state = *state;
  rec.history = std::move(history);
  rec.lazy_pending = (flags & kFlagLazy) != 0;
  if (flags & kFlagProof) rec.deletion_proof = DeletionProof{window.id(), proof_digest, produced_at};
  rec.outsourced_bytes = r.u64();
  if (r.boolean()) rec.meta = read_meta_row(r);
  if (r.boolean()) rec.crypto_time = AccumulatorValue::from_bytes(r.bytes(), config_.params);
  if (r.boolean()) rec.prev_crypto_time = AccumulatorValue::from_bytes(r.bytes(), config_.params);
  auto nd = r.u32();
  for (std::uint32_t i = 0; i < nd; ++i) rec.digests.push_back(r.digest());
  switch (static_cast<PayloadKind>(r.u8())) {
    case PayloadKind::Cells: rec.cells = read_cells(r); break;
    case PayloadKind::Ciphertexts: {
      auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) rec.ciphertexts.push_back(r.bytes());
      break;
    }
    case PayloadKind::None: break;
    default: throw Error(ErrorCode::Encoding, "segment has invalid payload kind");
  }
  // In-place overwrites may leave nothing after the cells; anything else is corruption.
  r.finish();
  return rec;
}

void CloudStore::persist(const EpochRecord& rec) const {
  if (!config_.directory) return;
  detail::write_file_atomic(segment_path(rec.window.id()), encode_segment(rec, config_.params));
}

void CloudStore::overwrite_payload(const EpochRecord& rec) const {
  if (!config_.directory) return;
  auto path = segment_path(rec.window.id());
  auto current = detail::read_file(path);
  auto offset = payload_offset_of(current);
  // The cell region is never shorter than the ciphertext region it replaces.
  detail::overwrite_at(path, offset, payload_region(rec));
  detail::overwrite_at(path, 0, fixed_header(rec, offset));
}

void CloudStore::ingest(const OutsourcePayload& payload) {
  const auto& s = payload.sensor;
  const auto& m = payload.meta;
  std::unique_lock lock(mutex_);
  if (records_.contains(s.epoch_id)) throw Error(ErrorCode::Duplicate, fmt::format("epoch {} already stored", s.epoch_id));
  if (s.epoch_id != m.window.id()) throw Error(ErrorCode::Inconsistent, "SensorData and MetaData epoch ids differ");
  if (m.window.delta() != config_.policy.delta())
    throw Error(ErrorCode::Inconsistent, "epoch duration differs from the broadcast policy");
  if (s.digests.empty()) throw Error(ErrorCode::Inconsistent, "epoch without digests");
  const bool empty_epoch = s.ciphertexts.empty() && s.digests.size() == 1;
  if (!empty_epoch && s.digests.size() != s.ciphertexts.size())
    throw Error(ErrorCode::Inconsistent, "digest and ciphertext counts differ");
  if (!records_.empty() && s.epoch_id < records_.rbegin()->first)
    throw Error(ErrorCode::Inconsistent, "epochs must be ingested in increasing order");

  EpochRecord rec{m.window};
  rec.digests = s.digests;
  rec.crypto_time = s.crypto_time;
  if (!records_.empty()) rec.prev_crypto_time = records_.rbegin()->second.crypto_time;
  rec.ciphertexts = s.ciphertexts;
  rec.meta = m;
  rec.history.emplace_back(DataState::Accessible, m.window.et());
  rec.outsourced_bytes = encode(s, config_.params).size() + encode(m).size();

  persist(rec);
  if (config_.directory) detail::append_line(*config_.directory / "index", std::to_string(s.epoch_id));
  if (config_.keep_shadow_copies) shadow_[s.epoch_id] = s.ciphertexts;
  records_.emplace(s.epoch_id, std::move(rec));
}

bool CloudStore::expunge_record(EpochRecord& rec, Time now, TickReport& report) {
  try {
    if (config_.lazy) {
      rec.lazy_pending = true;
    } else if (rec.ciphertexts.empty()) {
      rec.deletion_proof = DeletionProof{rec.window.id(), hash(ByteView{}), now};
    } else {
      auto result = expunge(CellArray::from_ciphertexts(rec.ciphertexts, rec.window.id()), rec.window.id(), now);
      for (auto& c : rec.ciphertexts) std::fill(c.begin(), c.end(), 0);
      rec.ciphertexts.clear();
      rec.cells = std::move(result.cells);
      rec.deletion_proof = result.proof;
    }
  } catch (const std::exception& e) {
    report.failures.push_back({rec.window.id(), e.what()});
    return false;
  }
  rec.state = DataState::Irrecoverable;
  rec.history.emplace_back(DataState::Irrecoverable, now);
  if (config_.lazy) persist(rec);
  else overwrite_payload(rec);
  report.transitions.push_back({rec.window.id(), DataState::Accessible, DataState::Irrecoverable, now});
  return true;
}

void CloudStore::purge_record(EpochRecord& rec, Time now, TickReport& report) {
  for (auto& c : rec.ciphertexts) std::fill(c.begin(), c.end(), 0);
  rec.ciphertexts.clear();
  rec.cells.reset();
  rec.deletion_proof.reset();
  rec.meta.reset();
  rec.digests.clear();
  rec.lazy_pending = false;
  rec.state = DataState::Purged;
  rec.history.emplace_back(DataState::Purged, now);
  persist(rec);
  report.transitions.push_back({rec.window.id(), DataState::Irrecoverable, DataState::Purged, now});
}

TickReport CloudStore::tick(Time now) {
  std::unique_lock lock(mutex_);
  if (now < last_tick_) throw Error(ErrorCode::Domain, "tick time went backwards");
  TickReport report;
  for (auto& [id, rec] : records_) {
    if (rec.state == DataState::Accessible && deletion_due(rec.window, config_.policy) <= now) {
      if (!expunge_record(rec, now, report)) continue;
    }
    if (rec.state == DataState::Irrecoverable) {
      auto expiry = verification_expiry(rec.window, config_.policy);
      if (expiry && *expiry <= now) purge_record(rec, now, report);
    }
  }
  last_tick_ = now;
  if (config_.directory) {
    auto text = std::to_string(now);
    detail::write_file_atomic(*config_.directory / "last_tick", as_bytes(text));
  }
  return report;
}

const EpochRecord& CloudStore::require(EpochId epoch) const {
  auto it = records_.find(epoch);
  if (it == records_.end()) throw Error(ErrorCode::NotFound, fmt::format("no epoch {}", epoch));
  return it->second;
}

std::vector<Bytes> CloudStore::fetch_for_sp(const std::string& sp_id, EpochId epoch, Time now) const {
  if (!config_.authorized_sps.contains(sp_id))
    throw Error(ErrorCode::Unauthorized, fmt::format("service provider '{}' is not on the SDP list", sp_id));
  std::shared_lock lock(mutex_);
  const auto& rec = require(epoch);
  if (rec.state != DataState::Accessible || rec.lazy_pending || deletion_due(rec.window, config_.policy) <= now)
    throw Error(ErrorCode::Expired, fmt::format("data expired for epoch {}", epoch));
  return rec.ciphertexts;
}

std::optional<EpochId> CloudStore::epoch_containing(Time t) const {
  std::shared_lock lock(mutex_);
  auto it = records_.upper_bound(t);
  if (it == records_.begin()) return std::nullopt;
  --it;
  if (!it->second.window.contains(t)) return std::nullopt;
  return it->first;
}

AttestationBundle CloudStore::fetch_bundle(Time t, Time now, bool include_cells) const {
  auto id = epoch_containing(t);
  if (!id) throw Error(ErrorCode::NotFound, fmt::format("no epoch contains t={}", t));
  std::shared_lock lock(mutex_);
  const auto& rec = require(*id);
  if (rec.state == DataState::Purged)
    throw Error(ErrorCode::Unavailable, fmt::format("verification material for epoch {} was purged", *id));
  if (!rec.meta || !rec.crypto_time) throw Error(ErrorCode::Inconsistent, "record lacks metadata");

  AttestationBundle b{rec.window,         rec.state, rec.digests, {}, std::nullopt, *rec.crypto_time,
                      rec.prev_crypto_time, rec.meta->enc_crypto_time, {}, std::nullopt, now};
  if (rec.state == DataState::Accessible) {
    b.ciphertexts = rec.ciphertexts;
    b.enc_state_tag = rec.meta->enc_accessible_tag;
  } else {
    b.enc_state_tag = rec.meta->enc_irrecoverable_tag;
    if (rec.lazy_pending) {
      // The dishonest path: the proof is produced only when someone asks.
      if (rec.ciphertexts.empty()) {
        b.deletion_proof = DeletionProof{*id, hash(ByteView{}), now};
      } else {
        auto result = expunge(CellArray::from_ciphertexts(rec.ciphertexts, *id), *id, now);
        if (include_cells) b.cells = std::move(result.cells);
        b.deletion_proof = result.proof;
      }
    } else {
      if (include_cells) b.cells = rec.cells;
      b.deletion_proof = rec.deletion_proof;
    }
  }
  return b;
}

std::optional<EpochRecord> CloudStore::record(EpochId epoch) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(epoch);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<EpochId> CloudStore::epochs() const {
  std::shared_lock lock(mutex_);
  std::vector<EpochId> out;
  out.reserve(records_.size());
  for (const auto& [id, rec] : records_) out.push_back(id);
  return out;
}

std::size_t CloudStore::outsourced_bytes() const {
  std::shared_lock lock(mutex_);
  std::size_t total = 0;
  for (const auto& [id, rec] : records_) total += rec.outsourced_bytes;
  return total;
}

Time CloudStore::last_tick() const {
  std::shared_lock lock(mutex_);
  return last_tick_;
}

std::vector<Bytes> CloudStore::shadow_ciphertexts(EpochId epoch) const {
  if (!config_.keep_shadow_copies) throw Error(ErrorCode::Domain, "shadow copies are disabled");
  std::shared_lock lock(mutex_);
  auto it = shadow_.find(epoch);
  if (it == shadow_.end()) throw Error(ErrorCode::NotFound, "no shadow copy");
  return it->second;
}

}  // namespace expunge
