#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

#include "expunge/bytes.hpp"
#include "expunge/canonical.hpp"

namespace expunge {

inline constexpr std::size_t kMinDeviceIdSize = 6;
inline constexpr std::size_t kMaxDeviceIdSize = 17;
inline constexpr std::size_t kDefaultMaxPayload = 64 * 1024;

/// One raw sensor tuple <device, time, payload>. The payload carries the
/// sensor (access point) id followed by the reading itself.
struct SensorReading {
  Bytes device_id;
  Time time = 0;
  Bytes payload;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

/// Throws Error(Encoding) when the device id or payload is out of bounds.
void validate(const SensorReading& r, std::size_t max_payload = kDefaultMaxPayload);

using EpochId = Time;

/// Half-open window [bt, bt + delta). The id of an epoch is its begin time.
class EpochWindow {
 public:
  EpochWindow(Time begin, Time delta);

  EpochId id() const noexcept { return begin_; }
  Time bt() const noexcept { return begin_; }
  Time et() const noexcept { return begin_ + delta_; }
  Time delta() const noexcept { return delta_; }
  bool contains(Time t) const noexcept { return t >= begin_ && t < et(); }
  EpochWindow next() const { return EpochWindow(et(), delta_); }

  friend bool operator==(const EpochWindow&, const EpochWindow&) = default;

 private:
  Time begin_;
  Time delta_;
};

/// <P_del, P_ver> in epochs, with the epoch duration they are measured in.
/// An absent p_ver means verification material is kept forever.
class RetentionPolicy {
 public:
  RetentionPolicy(std::uint32_t p_del, std::optional<std::uint32_t> p_ver, Time delta);

  std::uint32_t p_del() const noexcept { return p_del_; }
  std::optional<std::uint32_t> p_ver() const noexcept { return p_ver_; }
  Time delta() const noexcept { return delta_; }

  friend bool operator==(const RetentionPolicy&, const RetentionPolicy&) = default;

 private:
  std::uint32_t p_del_;
  std::optional<std::uint32_t> p_ver_;
  Time delta_;
};

/// Ordered: a record only ever moves forward through these states.
enum class DataState : std::uint8_t { Accessible = 0, Irrecoverable = 1, Purged = 2 };

std::string_view to_string(DataState s) noexcept;
std::optional<DataState> parse_data_state(std::uint8_t raw) noexcept;
bool is_legal_transition(DataState from, DataState to) noexcept;

EpochWindow epoch_of(Time t, Time delta, Time origin);

Time deletion_due(const EpochWindow& epoch, const RetentionPolicy& policy) noexcept;

/// std::nullopt stands for "never" (infinite P_ver).
std::optional<Time> verification_expiry(const EpochWindow& epoch, const RetentionPolicy& policy) noexcept;

DataState state_at(const EpochWindow& epoch, const RetentionPolicy& policy, Time now) noexcept;

// Canonical encodings.
Bytes encode(const SensorReading& r, std::size_t max_payload = kDefaultMaxPayload);
SensorReading decode_reading(ByteView in, std::size_t max_payload = kDefaultMaxPayload);
/// Encoded size of a reading without encoding it.
std::size_t encoded_size(const SensorReading& r) noexcept;

Bytes encode(const EpochWindow& w);
EpochWindow decode_window(ByteView in);

Bytes encode(const RetentionPolicy& p);
RetentionPolicy decode_policy(ByteView in);

// Field-level writers used when a domain value is nested in a larger record.
void write(canonical::Writer& w, const EpochWindow& e);
EpochWindow read_window(canonical::Reader& r);
void write(canonical::Writer& w, const RetentionPolicy& p);
RetentionPolicy read_policy(canonical::Reader& r);

}  // namespace expunge
