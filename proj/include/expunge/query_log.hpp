#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expunge/accumulator.hpp"
#include "expunge/keys.hpp"

namespace expunge {

using UserDirectory = std::map<std::string, SignPublicKey>;

/// <q, t, u>: a user query with the user's signature over (q, t).
struct QueryRecord {
  Bytes query;
  Time time = 0;
  std::string user_id;
  Signature signature{};

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

/// Bytes the user signs: len32(q) || q || u64(t).
Bytes query_signing_message(ByteView query, Time time);
QueryRecord make_query_record(Bytes query, Time time, std::string user_id, const SignKeyPair& user_key);
bool signature_valid(const QueryRecord& r, const UserDirectory& users) noexcept;

Bytes encode(const QueryRecord& r);
QueryRecord decode_query_record(ByteView in);

/// Bh^j = Hash(encode(record) || prev), where prev is x for the first record.
Digest chain_step(const QueryRecord& record, ByteView prev);
/// Stands in for the only record of a block sealed with no queries.
Bytes empty_block_sentinel(std::uint64_t block_id);

struct QueryBlock {
  std::uint64_t block_id = 1;
  Time created_at = 0;
  std::size_t capacity = 0;
  std::vector<QueryRecord> records;
  std::optional<Digest> running_digest;
  bool sealed = false;
  std::optional<AccumulatorValue> block_proof;

  bool full() const noexcept { return records.size() >= capacity; }
};

/// Throws Error(Crypto) for a bad signature, Error(Domain) when the block is
/// sealed or full.
void append_query(QueryBlock& block, QueryRecord record, const AccumulatorParams& params, const UserDirectory& users);

/// What the SP keeps on disk: records sealed for the SDP plus BProof_i.
struct EncryptedBlock {
  std::uint64_t block_id = 1;
  Time created_at = 0;
  std::vector<Bytes> encrypted_records;
  AccumulatorValue block_proof;
};

/// BProof_i = prev^{Bh^n_i} mod eta (prev = x for block 1). Empty blocks are
/// sealed over the sentinel record.
EncryptedBlock seal_block(QueryBlock& block, const std::optional<AccumulatorValue>& prev_proof,
                          const AccumulatorParams& params, const BoxPublicKey& sdp_public);

Bytes encode(const EncryptedBlock& b, const AccumulatorParams& params);
EncryptedBlock decode_encrypted_block(ByteView in, const AccumulatorParams& params);

struct AuditVerdict {
  std::uint64_t block_id = 0;
  bool decrypt_ok = false;
  bool proof_matches = false;
  std::vector<std::size_t> bad_signatures;  // 0-based record indices
  std::size_t record_count = 0;
  std::optional<AccumulatorValue> recomputed_proof;
  std::string error;

  bool ok() const noexcept { return error.empty() && decrypt_ok && proof_matches && bad_signatures.empty(); }
};

/// SDP-side audit of one block against BProof_{i-1} (nullopt only for block 1).
AuditVerdict audit_block(const EncryptedBlock& block, const std::optional<AccumulatorValue>& prev_proof,
                         const BoxKeyPair& sdp, const AccumulatorParams& params, const UserDirectory& users);

struct ChainAudit {
  std::vector<AuditVerdict> blocks;
  bool continuity_ok = true;  // ids contiguous from the checkpoint
  bool ok() const noexcept;
};

/// Audits consecutive blocks starting at block 1 (or after a trusted checkpoint).
ChainAudit audit_chain(std::span<const EncryptedBlock> blocks, const BoxKeyPair& sdp, const AccumulatorParams& params,
                       const UserDirectory& users,
                       std::optional<std::pair<std::uint64_t, AccumulatorValue>> checkpoint = std::nullopt);

struct QueryLoggerConfig {
  std::size_t block_capacity = 256;
  Time max_block_age = 60 * 60 * 1000;
  std::size_t max_query_bytes = 4096;
  std::size_t enclave_memory_budget = 96u << 20;
  std::optional<std::filesystem::path> directory;
};

/// The simulated enclave's logger: owns the open block, seals on capacity or
/// age, and writes one file per sealed block.
class QueryLogger {
 public:
  QueryLogger(QueryLoggerConfig config, AccumulatorParams params, BoxPublicKey sdp_public, UserDirectory users,
              Time start);

  /// Returns false (and counts a security event) when the signature does not
  /// verify or the user is unknown.
  bool append(QueryRecord record, Time now);
  /// Seals the open block if it reached max_block_age.
  void poll(Time now);
  /// Seals the open block unconditionally (sentinel when empty).
  void seal(Time now);

  std::vector<EncryptedBlock> sealed_blocks() const;
  std::optional<EncryptedBlock> block(std::uint64_t id) const;
  std::size_t security_events() const;
  std::size_t open_records() const;

  /// Reads back every block file in a logger directory.
  static std::vector<EncryptedBlock> load_blocks(const std::filesystem::path& dir, const AccumulatorParams& params);
  static std::filesystem::path block_path(const std::filesystem::path& dir, std::uint64_t id);

 private:
  void seal_locked(Time now);

  QueryLoggerConfig config_;
  AccumulatorParams params_;
  BoxPublicKey sdp_public_;
  UserDirectory users_;
  mutable std::mutex mutex_;
  QueryBlock open_;
  std::optional<AccumulatorValue> last_proof_;
  std::vector<EncryptedBlock> sealed_;
  std::size_t security_events_ = 0;
};

}  // namespace expunge
