#include "expunge/core_model.hpp"

#include <string>

namespace expunge {

void validate(const SensorReading& r, std::size_t max_payload) {
  if (r.device_id.size() < kMinDeviceIdSize || r.device_id.size() > kMaxDeviceIdSize)
    throw Error(ErrorCode::Encoding, "device id must be 6-17 bytes, got " + std::to_string(r.device_id.size()));
  if (r.payload.size() > max_payload)
    throw Error(ErrorCode::Encoding, "payload of " + std::to_string(r.payload.size()) + " bytes exceeds maximum");
}

EpochWindow::EpochWindow(Time begin, Time delta) : begin_(begin), delta_(delta) {
  if (delta == 0) throw Error(ErrorCode::Domain, "epoch duration must be positive");
  if (begin > UINT64_MAX - delta) throw Error(ErrorCode::Domain, "epoch end overflows");
}

RetentionPolicy::RetentionPolicy(std::uint32_t p_del, std::optional<std::uint32_t> p_ver, Time delta)
    : p_del_(p_del), p_ver_(p_ver), delta_(delta) {
  if (delta == 0) throw Error(ErrorCode::Domain, "epoch duration must be positive");
  if (p_ver && *p_ver == 0) throw Error(ErrorCode::Domain, "p_ver must be positive");
  if (p_ver && *p_ver < p_del) throw Error(ErrorCode::Domain, "p_ver must not be smaller than p_del");
}

std::string_view to_string(DataState s) noexcept {
  switch (s) {
    case DataState::Accessible: return "accessible";
    case DataState::Irrecoverable: return "irrecoverable";
    case DataState::Purged: return "purged";
  }
  return "unknown";
}

std::optional<DataState> parse_data_state(std::uint8_t raw) noexcept {
  if (raw > 2) return std::nullopt;
  return static_cast<DataState>(raw);
}

bool is_legal_transition(DataState from, DataState to) noexcept {
  return (from == DataState::Accessible && to == DataState::Irrecoverable) ||
         (from == DataState::Irrecoverable && to == DataState::Purged);
}

EpochWindow epoch_of(Time t, Time delta, Time origin) {
  if (delta == 0) throw Error(ErrorCode::Domain, "epoch duration must be positive");
  if (t < origin) throw Error(ErrorCode::Domain, "time precedes the configured origin");
  return EpochWindow(origin + (t - origin) / delta * delta, delta);
}

Time deletion_due(const EpochWindow& epoch, const RetentionPolicy& policy) noexcept {
  return epoch.et() + static_cast<Time>(policy.p_del()) * policy.delta();
}

std::optional<Time> verification_expiry(const EpochWindow& epoch, const RetentionPolicy& policy) noexcept {
  if (!policy.p_ver()) return std::nullopt;
  return epoch.et() + static_cast<Time>(*policy.p_ver()) * policy.delta();
}

DataState state_at(const EpochWindow& epoch, const RetentionPolicy& policy, Time now) noexcept {
  if (now < deletion_due(epoch, policy)) return DataState::Accessible;
  auto expiry = verification_expiry(epoch, policy);
  if (!expiry || now < *expiry) return DataState::Irrecoverable;
  return DataState::Purged;
}

Bytes encode(const SensorReading& r, std::size_t max_payload) {
  validate(r, max_payload);
  canonical::Writer w(canonical::Tag::SensorReading);
  w.bytes(r.device_id).u64(r.time).bytes(r.payload);
  return std::move(w).take();
}

SensorReading decode_reading(ByteView in, std::size_t max_payload) {
  canonical::Reader rd(in);
  rd.expect_header(canonical::Tag::SensorReading);
  SensorReading r;
  r.device_id = rd.bytes(kMaxDeviceIdSize);
  r.time = rd.u64();
  r.payload = rd.bytes(max_payload);
  rd.finish();
  validate(r, max_payload);
  return r;
}

std::size_t encoded_size(const SensorReading& r) noexcept {
  return canonical::kHeaderSize + 4 + r.device_id.size() + 8 + 4 + r.payload.size();
}

void write(canonical::Writer& w, const EpochWindow& e) { w.u64(e.bt()).u64(e.delta()); }

EpochWindow read_window(canonical::Reader& r) {
  auto bt = r.u64();
  auto delta = r.u64();
  return EpochWindow(bt, delta);
}

Bytes encode(const EpochWindow& e) {
  canonical::Writer w(canonical::Tag::EpochWindow);
  write(w, e);
  return std::move(w).take();
}

EpochWindow decode_window(ByteView in) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::EpochWindow);
  auto e = read_window(r);
  r.finish();
  return e;
}

// p_ver is written as u32 with 0 reserved for "infinite" (p_ver is never 0 otherwise).
void write(canonical::Writer& w, const RetentionPolicy& p) {
  w.u32(p.p_del()).u32(p.p_ver().value_or(0)).u64(p.delta());
}

RetentionPolicy read_policy(canonical::Reader& r) {
  auto p_del = r.u32();
  auto p_ver = r.u32();
  auto delta = r.u64();
  return RetentionPolicy(p_del, p_ver == 0 ? std::nullopt : std::optional<std::uint32_t>(p_ver), delta);
}

Bytes encode(const RetentionPolicy& p) {
  canonical::Writer w(canonical::Tag::RetentionPolicy);
  write(w, p);
  return std::move(w).take();
}

RetentionPolicy decode_policy(ByteView in) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::RetentionPolicy);
  auto p = read_policy(r);
  r.finish();
  return p;
}

}  // namespace expunge
