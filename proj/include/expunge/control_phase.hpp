#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <vector>

#include "expunge/accumulator.hpp"
#include "expunge/core_model.hpp"
#include "expunge/keys.hpp"

namespace expunge {

struct PositionedReading {
  std::uint64_t position;  // 1-based arrival order within the epoch
  SensorReading reading;
};

/// Assigns 1-based positions in arrival order. Throws Error(EpochMismatch)
/// if any reading lies outside the window.
std::vector<PositionedReading> batch_epoch(std::span<const SensorReading> readings, const EpochWindow& window);

/// Hash(len32(device) || device || u64(epoch) || u64(position)).
Digest reading_digest(ByteView device_id, EpochId epoch, std::uint64_t position);

/// Stand-in digest for an epoch with no readings: Hash("EMPTY" || u64(epoch)).
Digest empty_epoch_digest(EpochId epoch);

/// Hash(h^1 || h^2 || ... || h^n), the exponent fed to the accumulator.
Digest digest_list_hash(std::span<const Digest> digests);

/// CT_i = prev^{Hash(h^1 || ... || h^n)} mod eta. Throws Error(Domain) on an empty list.
AccumulatorValue epoch_timestamp(const AccumulatorValue& prev, std::span<const Digest> digests,
                                 const AccumulatorParams& params);

/// Sealed for the enclave; the plaintext binds the reading to its epoch.
Bytes encrypt_reading(const SensorReading& r, EpochId epoch, const BoxPublicKey& enclave_key);

/// Length of encrypt_reading() output for the given field sizes.
std::size_t reading_ciphertext_size(std::size_t device_id_size, std::size_t payload_size) noexcept;

struct ReadingPlaintext {
  SensorReading reading;
  EpochId epoch;
};
ReadingPlaintext decrypt_reading(ByteView ciphertext, const BoxKeyPair& enclave);

/// Hash over the length-prefixed ciphertexts, in order.
Digest accessible_tag(std::span<const Bytes> ciphertexts);

/// Deletion proof the cloud must later produce: runs the expunge transform on
/// a copy of the ciphertext cells. Empty epochs hash to Hash("").
Digest irrecoverable_tag(std::span<const Bytes> ciphertexts, EpochId epoch);

/// The SensorData relation for one epoch.
struct SensorDataRow {
  EpochId epoch_id;
  std::vector<Digest> digests;
  AccumulatorValue crypto_time;
  std::vector<Bytes> ciphertexts;

  bool is_empty_epoch() const noexcept { return ciphertexts.empty(); }
};

/// The MetaData relation for one epoch; everything but the window is under K.
struct MetaDataRow {
  EpochWindow window;
  Bytes enc_crypto_time;
  Bytes enc_accessible_tag;
  Bytes enc_irrecoverable_tag;
};

struct OutsourcePayload {
  SensorDataRow sensor;
  MetaDataRow meta;
};

struct ControlTimings {
  std::chrono::nanoseconds digest{0};
  std::chrono::nanoseconds encrypt{0};
  std::chrono::nanoseconds accessible_tag{0};
  std::chrono::nanoseconds irrecoverable_tag{0};

  std::chrono::nanoseconds total() const noexcept { return digest + encrypt + accessible_tag + irrecoverable_tag; }
  ControlTimings& operator+=(const ControlTimings& o) noexcept;
};

/// Public material the SDP needs to run the control phase.
struct ControlKeys {
  BoxPublicKey enclave_public;
  SymmetricKey shared_key;
};

/// One epoch of the control phase: digests, chained timestamp, encryption,
/// both verifiable tags and the two outsourced rows. Any failure throws and
/// no partial payload is returned.
OutsourcePayload build_outsource_payload(const EpochWindow& window, std::span<const SensorReading> readings,
                                         const AccumulatorValue& prev_ct, const ControlKeys& keys,
                                         const AccumulatorParams& params, ControlTimings* timings = nullptr);

/// Stateful SDP-side driver that carries CT_{i-1} from epoch to epoch.
class ControlPhase {
 public:
  ControlPhase(AccumulatorParams params, ControlKeys keys);

  /// Epochs must be processed in increasing order.
  OutsourcePayload process(const EpochWindow& window, std::span<const SensorReading> readings,
                           ControlTimings* timings = nullptr);

  const AccumulatorValue& last_crypto_time() const noexcept { return prev_; }
  std::optional<EpochId> last_epoch() const noexcept { return last_epoch_; }

 private:
  AccumulatorParams params_;
  ControlKeys keys_;
  AccumulatorValue prev_;
  std::optional<EpochId> last_epoch_;
};

Bytes encode(const SensorDataRow& row, const AccumulatorParams& params);
SensorDataRow decode_sensor_row(ByteView in, const AccumulatorParams& params);
Bytes encode(const MetaDataRow& row);
MetaDataRow decode_meta_row(ByteView in);
void write(canonical::Writer& w, const SensorDataRow& row, const AccumulatorParams& params);
SensorDataRow read_sensor_row(canonical::Reader& r, const AccumulatorParams& params);
void write(canonical::Writer& w, const MetaDataRow& row);
MetaDataRow read_meta_row(canonical::Reader& r);

/// MetaData fields are encrypted under K as u64(epoch id) || value, so a
/// field cannot be replayed under another window.
Bytes seal_meta_field(const SymmetricKey& key, EpochId epoch, ByteView value);
/// Throws Error(Crypto) on authentication failure or an epoch id mismatch.
Bytes open_meta_field(const SymmetricKey& key, EpochId epoch, ByteView sealed);

/// Decrypts one of the MetaData tag fields back to a digest.
Digest decrypt_tag(const SymmetricKey& key, EpochId epoch, ByteView enc_tag);

}  // namespace expunge
