#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "expunge/bundle.hpp"
#include "expunge/control_phase.hpp"

namespace expunge {

struct StateTransition {
  EpochId epoch;
  DataState from;
  DataState to;
  Time at;

  friend bool operator==(const StateTransition&, const StateTransition&) = default;
};

struct TickFailure {
  EpochId epoch;
  std::string reason;
};

struct TickReport {
  std::vector<StateTransition> transitions;
  std::vector<TickFailure> failures;
};

/// Cloud-side view of one epoch.
struct EpochRecord {
  explicit EpochRecord(EpochWindow w) : window(w) {}

  EpochWindow window;
  DataState state = DataState::Accessible;
  std::vector<Digest> digests;
  std::optional<AccumulatorValue> crypto_time;
  std::optional<AccumulatorValue> prev_crypto_time;  // nullopt for the first epoch
  std::vector<Bytes> ciphertexts;                    // Accessible only (or a lazy cloud's undeleted data)
  std::optional<CellArray> cells;                    // Irrecoverable: overwritten cells
  std::optional<MetaDataRow> meta;
  std::optional<DeletionProof> deletion_proof;
  std::vector<std::pair<DataState, Time>> history;
  bool lazy_pending = false;  // fault injection: claims Irrecoverable without having deleted
  std::size_t outsourced_bytes = 0;
};

struct CloudConfig {
  RetentionPolicy policy;
  AccumulatorParams params;
  std::set<std::string> authorized_sps;
  /// Segment directory; in-memory only when absent.
  std::optional<std::filesystem::path> directory;
  /// Fault injection: skip deletion at tick time and recompute proofs on demand.
  bool lazy = false;
  /// Test support: keep pre-deletion ciphertexts to cross-check stored proofs.
  bool keep_shadow_copies = false;
};

/// Persists the SensorData/MetaData relations, enforces the retention policy
/// and serves SP fetches and attestation bundles.
///
/// On disk every epoch lives in its own segment file; expunged cells are
/// written over the ciphertext region of that same file.
class CloudStore {
 public:
  /// With a directory configured, existing segments listed in its index are
  /// loaded back (the store survives process restarts).
  explicit CloudStore(CloudConfig config);

  /// Throws Error(Duplicate) for a known epoch and Error(Inconsistent) for
  /// rows that disagree or arrive out of order.
  void ingest(const OutsourcePayload& payload);

  TickReport tick(Time now);

  /// Ciphertexts for an authorised SP while the epoch is still accessible
  /// under the policy at `now`.
  std::vector<Bytes> fetch_for_sp(const std::string& sp_id, EpochId epoch, Time now) const;

  /// Bundle for the epoch containing time t (or with id t), stamped served_at = now.
  /// Overwritten cells ride along only when asked for; the proof alone is
  /// enough for the tag check.
  AttestationBundle fetch_bundle(Time t, Time now, bool include_cells = false) const;

  std::optional<EpochRecord> record(EpochId epoch) const;
  std::vector<EpochId> epochs() const;
  std::optional<EpochId> epoch_containing(Time t) const;
  std::size_t outsourced_bytes() const;
  Time last_tick() const;

  /// Test support; throws unless keep_shadow_copies was set.
  std::vector<Bytes> shadow_ciphertexts(EpochId epoch) const;

  const CloudConfig& config() const noexcept { return config_; }

 private:
  void persist(const EpochRecord& rec) const;
  void overwrite_payload(const EpochRecord& rec) const;
  std::filesystem::path segment_path(EpochId epoch) const;
  EpochRecord load_segment(const std::filesystem::path& path) const;
  bool expunge_record(EpochRecord& rec, Time now, TickReport& report);
  void purge_record(EpochRecord& rec, Time now, TickReport& report);
  const EpochRecord& require(EpochId epoch) const;

  CloudConfig config_;
  mutable std::shared_mutex mutex_;
  std::map<EpochId, EpochRecord> records_;
  std::map<EpochId, std::vector<Bytes>> shadow_;
  Time last_tick_ = 0;
};

}  // namespace expunge
