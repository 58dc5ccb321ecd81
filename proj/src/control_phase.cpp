#include "expunge/control_phase.hpp"

#include <string>

#include "expunge/expunge_engine.hpp"
#include "expunge/hash.hpp"

namespace expunge {

namespace {
using Clock = std::chrono::steady_clock;

std::chrono::nanoseconds since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
}

constexpr std::size_t kMaxItems = 1u << 26;
}  // namespace

std::vector<PositionedReading> batch_epoch(std::span<const SensorReading> readings, const EpochWindow& window) {
  std::vector<PositionedReading> out;
  out.reserve(readings.size());
  std::uint64_t position = 1;
  for (const auto& r : readings) {
    if (!window.contains(r.time))
      throw Error(ErrorCode::EpochMismatch, "reading at t=" + std::to_string(r.time) + " outside epoch [" +
                                                std::to_string(window.bt()) + ", " + std::to_string(window.et()) + ")");
    out.push_back({position++, r});
  }
  return out;
}

Digest reading_digest(ByteView device_id, EpochId epoch, std::uint64_t position) {
  canonical::Writer w;
  w.bytes(device_id).u64(epoch).u64(position);
  return hash(w.view());
}

Digest empty_epoch_digest(EpochId epoch) {
  return Hasher{}.update(std::string_view("EMPTY")).update_u64(epoch).finish();
}

Digest digest_list_hash(std::span<const Digest> digests) {
  Hasher h;
  for (const auto& d : digests) h.update(d);
  return h.finish();
}

AccumulatorValue epoch_timestamp(const AccumulatorValue& prev, std::span<const Digest> digests,
                                 const AccumulatorParams& params) {
  if (digests.empty()) throw Error(ErrorCode::Domain, "timestamp over an empty digest list");
  return step(prev, Exponent::from_digest(digest_list_hash(digests)), params);
}

Bytes encrypt_reading(const SensorReading& r, EpochId epoch, const BoxPublicKey& enclave_key) {
  validate(r);
  canonical::Writer w(canonical::Tag::ReadingPlaintext);
  w.bytes(r.device_id).u64(r.time).bytes(r.payload).u64(epoch);
  return seal(enclave_key, w.view());
}

std::size_t reading_ciphertext_size(std::size_t device_id_size, std::size_t payload_size) noexcept {
  return kSealOverhead + canonical::kHeaderSize + 4 + device_id_size + 8 + 4 + payload_size + 8;
}

ReadingPlaintext decrypt_reading(ByteView ciphertext, const BoxKeyPair& enclave) {
  auto plain = open_sealed(enclave, ciphertext);
  canonical::Reader rd(plain);
  rd.expect_header(canonical::Tag::ReadingPlaintext);
  ReadingPlaintext out;
  out.reading.device_id = rd.bytes(kMaxDeviceIdSize);
  out.reading.time = rd.u64();
  out.reading.payload = rd.bytes(kDefaultMaxPayload);
  out.epoch = rd.u64();
  rd.finish();
  return out;
}

Digest accessible_tag(std::span<const Bytes> ciphertexts) {
  Hasher h;
  for (const auto& c : ciphertexts) {
    std::uint8_t prefix[4] = {static_cast<std::uint8_t>(c.size() >> 24), static_cast<std::uint8_t>(c.size() >> 16),
                              static_cast<std::uint8_t>(c.size() >> 8), static_cast<std::uint8_t>(c.size())};
    h.update(ByteView(prefix, 4)).update(c);
  }
  return h.finish();
}

Digest irrecoverable_tag(std::span<const Bytes> ciphertexts, EpochId epoch) {
  if (ciphertexts.empty()) return hash(ByteView{});
  auto cells = CellArray::from_ciphertexts(std::vector<Bytes>(ciphertexts.begin(), ciphertexts.end()), epoch);
  return expunge(std::move(cells), epoch, 0).proof.proof;
}

ControlTimings& ControlTimings::operator+=(const ControlTimings& o) noexcept {
  digest += o.digest;
  encrypt += o.encrypt;
  accessible_tag += o.accessible_tag;
  irrecoverable_tag += o.irrecoverable_tag;
  return *this;
}

OutsourcePayload build_outsource_payload(const EpochWindow& window, std::span<const SensorReading> readings,
                                         const AccumulatorValue& prev_ct, const ControlKeys& keys,
                                         const AccumulatorParams& params, ControlTimings* timings) {
  ControlTimings local;
  auto batched = batch_epoch(readings, window);
  const EpochId id = window.id();

  auto t0 = Clock::now();
  std::vector<Digest> digests;
  digests.reserve(std::max<std::size_t>(1, batched.size()));
  for (const auto& pr : batched) digests.push_back(reading_digest(pr.reading.device_id, id, pr.position));
  if (digests.empty()) digests.push_back(empty_epoch_digest(id));
  auto ct = epoch_timestamp(prev_ct, digests, params);
  local.digest = since(t0);

  t0 = Clock::now();
  std::vector<Bytes> ciphertexts;
  ciphertexts.reserve(batched.size());
  for (const auto& pr : batched) ciphertexts.push_back(encrypt_reading(pr.reading, id, keys.enclave_public));
  local.encrypt = since(t0);

  t0 = Clock::now();
  auto a_tag = accessible_tag(ciphertexts);
  local.accessible_tag = since(t0);

  t0 = Clock::now();
  auto ir_tag = irrecoverable_tag(ciphertexts, id);
  local.irrecoverable_tag = since(t0);

  MetaDataRow meta{window, seal_meta_field(keys.shared_key, id, ct.to_bytes(params)),
                   seal_meta_field(keys.shared_key, id, a_tag), seal_meta_field(keys.shared_key, id, ir_tag)};
  if (timings) *timings += local;
  return OutsourcePayload{SensorDataRow{id, std::move(digests), std::move(ct), std::move(ciphertexts)},
                          std::move(meta)};
}

ControlPhase::ControlPhase(AccumulatorParams params, ControlKeys keys)
    : params_(std::move(params)), keys_(std::move(keys)), prev_(params_.seed()) {}

OutsourcePayload ControlPhase::process(const EpochWindow& window, std::span<const SensorReading> readings,
                                       ControlTimings* timings) {
  if (last_epoch_ && window.id() <= *last_epoch_)
    throw Error(ErrorCode::Inconsistent, "epochs must be processed in increasing order");
  auto payload = build_outsource_payload(window, readings, prev_, keys_, params_, timings);
  prev_ = payload.sensor.crypto_time;
  last_epoch_ = window.id();
  return payload;
}

Bytes seal_meta_field(const SymmetricKey& key, EpochId epoch, ByteView value) {
  canonical::Writer w;
  w.u64(epoch).raw(value);
  return ae_encrypt(key, w.view());
}

Bytes open_meta_field(const SymmetricKey& key, EpochId epoch, ByteView sealed) {
  auto plain = ae_decrypt(key, sealed);
  canonical::Reader r(plain);
  if (r.u64() != epoch) throw Error(ErrorCode::Crypto, "metadata field belongs to another epoch");
  auto rest = r.raw(r.remaining());
  return Bytes(rest.begin(), rest.end());
}

Digest decrypt_tag(const SymmetricKey& key, EpochId epoch, ByteView enc_tag) {
  auto plain = open_meta_field(key, epoch, enc_tag);
  if (plain.size() != kDigestSize) throw Error(ErrorCode::Crypto, "decrypted tag has wrong length");
  Digest d{};
  std::copy(plain.begin(), plain.end(), d.begin());
  return d;
}

void write(canonical::Writer& w, const SensorDataRow& row, const AccumulatorParams& params) {
  w.u64(row.epoch_id);
  w.u32(static_cast<std::uint32_t>(row.digests.size()));
  for (const auto& d : row.digests) w.digest(d);
  w.bytes(row.crypto_time.to_bytes(params));
  w.u32(static_cast<std::uint32_t>(row.ciphertexts.size()));
  for (const auto& c : row.ciphertexts) w.bytes(c);
}

SensorDataRow read_sensor_row(canonical::Reader& r, const AccumulatorParams& params) {
  auto id = r.u64();
  auto nd = r.u32();
  if (nd > kMaxItems || nd * kDigestSize > r.remaining()) throw Error(ErrorCode::Encoding, "digest count too large");
  std::vector<Digest> digests;
  digests.reserve(nd);
  for (std::uint32_t i = 0; i < nd; ++i) digests.push_back(r.digest());
  auto ct = AccumulatorValue::from_bytes(r.bytes(params.value_width()), params);
  auto nc = r.u32();
  if (nc > kMaxItems || nc * 4ull > r.remaining()) throw Error(ErrorCode::Encoding, "ciphertext count too large");
  std::vector<Bytes> cts;
  cts.reserve(nc);
  for (std::uint32_t i = 0; i < nc; ++i) cts.push_back(r.bytes());
  return SensorDataRow{id, std::move(digests), std::move(ct), std::move(cts)};
}

void write(canonical::Writer& w, const MetaDataRow& row) {
  write(w, row.window);
  w.bytes(row.enc_crypto_time).bytes(row.enc_accessible_tag).bytes(row.enc_irrecoverable_tag);
}

MetaDataRow read_meta_row(canonical::Reader& r) {
  auto window = read_window(r);
  auto ct = r.bytes(4096);
  auto a = r.bytes(4096);
  auto ir = r.bytes(4096);
  return MetaDataRow{window, std::move(ct), std::move(a), std::move(ir)};
}

Bytes encode(const SensorDataRow& row, const AccumulatorParams& params) {
  canonical::Writer w(canonical::Tag::SensorDataRow);
  write(w, row, params);
  return std::move(w).take();
}

SensorDataRow decode_sensor_row(ByteView in, const AccumulatorParams& params) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::SensorDataRow);
  auto row = read_sensor_row(r, params);
  r.finish();
  return row;
}

Bytes encode(const MetaDataRow& row) {
  canonical::Writer w(canonical::Tag::MetaDataRow);
  write(w, row);
  return std::move(w).take();
}

MetaDataRow decode_meta_row(ByteView in) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::MetaDataRow);
  auto row = read_meta_row(r);
  r.finish();
  return row;
}

}  // namespace expunge
