#include "expunge/query_log.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "expunge/canonical.hpp"
#include "expunge/hash.hpp"
#include "file_io.hpp"

namespace expunge {

Bytes query_signing_message(ByteView query, Time time) {
  canonical::Writer w;
  w.bytes(query).u64(time);
  return std::move(w).take();
}

QueryRecord make_query_record(Bytes query, Time time, std::string user_id, const SignKeyPair& user_key) {
  QueryRecord r{std::move(query), time, std::move(user_id), {}};
  r.signature = sign(user_key, query_signing_message(r.query, r.time));
  return r;
}

bool signature_valid(const QueryRecord& r, const UserDirectory& users) noexcept {
  auto it = users.find(r.user_id);
  if (it == users.end()) return false;
  try {
    return verify_signature(it->second, query_signing_message(r.query, r.time), r.signature);
  } catch (...) {
    return false;
  }
}

Bytes encode(const QueryRecord& r) {
  canonical::Writer w(canonical::Tag::QueryRecord);
  w.bytes(r.query).u64(r.time).str(r.user_id).raw(r.signature);
  return std::move(w).take();
}

QueryRecord decode_query_record(ByteView in) {
  canonical::Reader rd(in);
  rd.expect_header(canonical::Tag::QueryRecord);
  QueryRecord r;
  r.query = rd.bytes();
  r.time = rd.u64();
  r.user_id = rd.str(256);
  auto sig = rd.raw(kSignatureSize);
  std::copy(sig.begin(), sig.end(), r.signature.begin());
  rd.finish();
  return r;
}

Digest chain_step(const QueryRecord& record, ByteView prev) { return hash({encode(record), prev}); }

Bytes empty_block_sentinel(std::uint64_t block_id) {
  auto d = Hasher{}.update(std::string_view("EMPTYBLOCK")).update_u64(block_id).finish();
  return Bytes(d.begin(), d.end());
}

namespace {

Digest sentinel_chain(std::uint64_t block_id, const AccumulatorParams& params) {
  return hash({empty_block_sentinel(block_id), params.seed().to_bytes(params)});
}

AccumulatorValue block_proof_from(const std::optional<AccumulatorValue>& prev, const Digest& head,
                                  const AccumulatorParams& params) {
  return step(prev.value_or(params.seed()), Exponent::from_digest(head), params);
}

}  // namespace

void append_query(QueryBlock& block, QueryRecord record, const AccumulatorParams& params, const UserDirectory& users) {
  if (block.sealed) throw Error(ErrorCode::Domain, "block is sealed");
  if (block.full()) throw Error(ErrorCode::Domain, "block is full; seal it first");
  if (!signature_valid(record, users))
    throw Error(ErrorCode::Crypto, fmt::format("query signature from '{}' does not verify", record.user_id));
  if (block.running_digest) {
    block.running_digest = chain_step(record, *block.running_digest);
  } else {
    block.running_digest = chain_step(record, params.seed().to_bytes(params));
  }
  block.records.push_back(std::move(record));
}

EncryptedBlock seal_block(QueryBlock& block, const std::optional<AccumulatorValue>& prev_proof,
                          const AccumulatorParams& params, const BoxPublicKey& sdp_public) {
  if (block.sealed) throw Error(ErrorCode::Domain, "block already sealed");
  if ((block.block_id == 1) != !prev_proof.has_value())
    throw Error(ErrorCode::Domain, "only block 1 chains from the seed");
  const Digest head = block.running_digest ? *block.running_digest : sentinel_chain(block.block_id, params);
  auto proof = block_proof_from(prev_proof, head, params);

  std::vector<Bytes> encrypted;
  encrypted.reserve(block.records.size());
  for (const auto& r : block.records) encrypted.push_back(seal(sdp_public, encode(r)));

  block.block_proof = proof;
  block.sealed = true;
  return EncryptedBlock{block.block_id, block.created_at, std::move(encrypted), std::move(proof)};
}

// Layout: header, block id, creation time, proof, then the encrypted records.
Bytes encode(const EncryptedBlock& b, const AccumulatorParams& params) {
  canonical::Writer w(canonical::Tag::QueryBlock);
  w.u64(b.block_id).u64(b.created_at).bytes(b.block_proof.to_bytes(params));
  w.u32(static_cast<std::uint32_t>(b.encrypted_records.size()));
  for (const auto& r : b.encrypted_records) w.bytes(r);
  return std::move(w).take();
}

EncryptedBlock decode_encrypted_block(ByteView in, const AccumulatorParams& params) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::QueryBlock);
  auto id = r.u64();
  auto created = r.u64();
  auto proof = AccumulatorValue::from_bytes(r.bytes(params.value_width()), params);
  auto n = r.u32();
  if (static_cast<std::uint64_t>(n) * 4 > r.remaining()) throw Error(ErrorCode::Encoding, "record count too large");
  std::vector<Bytes> recs;
  recs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) recs.push_back(r.bytes());
  r.finish();
  return EncryptedBlock{id, created, std::move(recs), std::move(proof)};
}

AuditVerdict audit_block(const EncryptedBlock& block, const std::optional<AccumulatorValue>& prev_proof,
                         const BoxKeyPair& sdp, const AccumulatorParams& params, const UserDirectory& users) {
  AuditVerdict v;
  v.block_id = block.block_id;
  v.record_count = block.encrypted_records.size();
  if ((block.block_id == 1) != !prev_proof.has_value()) {
    v.error = "previous block proof missing or unexpected";
    return v;
  }
  std::vector<QueryRecord> records;
  try {
    for (const auto& enc : block.encrypted_records) records.push_back(decode_query_record(open_sealed(sdp, enc)));
    v.decrypt_ok = true;
  } catch (const Error& e) {
    v.error = fmt::format("tampered block: {}", e.what());
    return v;
  }
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!signature_valid(records[i], users)) v.bad_signatures.push_back(i);

  Digest head;
  if (records.empty()) {
    head = sentinel_chain(block.block_id, params);
  } else {
    Bytes prev = params.seed().to_bytes(params);
    for (const auto& r : records) {
      head = chain_step(r, prev);
      prev.assign(head.begin(), head.end());
    }
  }
  v.recomputed_proof = block_proof_from(prev_proof, head, params);
  v.proof_matches = *v.recomputed_proof == block.block_proof;
  return v;
}

bool ChainAudit::ok() const noexcept {
  return continuity_ok && std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.ok(); });
}

ChainAudit audit_chain(std::span<const EncryptedBlock> blocks, const BoxKeyPair& sdp, const AccumulatorParams& params,
                       const UserDirectory& users, std::optional<std::pair<std::uint64_t, AccumulatorValue>> checkpoint) {
  ChainAudit out;
  std::uint64_t expected_id = checkpoint ? checkpoint->first + 1 : 1;
  std::optional<AccumulatorValue> trusted;
  if (checkpoint) trusted = checkpoint->second;
  for (const auto& b : blocks) {
    if (b.block_id != expected_id) out.continuity_ok = false;
    // Chain from the last proof we recomputed ourselves, never from the SP's claim.
    auto v = audit_block(b, trusted, sdp, params, users);
    trusted = v.recomputed_proof;
    if (!trusted) trusted = b.block_proof;
    out.blocks.push_back(std::move(v));
    expected_id = b.block_id + 1;
  }
  return out;
}

QueryLogger::QueryLogger(QueryLoggerConfig config, AccumulatorParams params, BoxPublicKey sdp_public,
                         UserDirectory users, Time start)
    : config_(std::move(config)), params_(std::move(params)), sdp_public_(sdp_public), users_(std::move(users)) {
  if (config_.block_capacity == 0) throw Error(ErrorCode::Domain, "block capacity must be positive");
  const std::size_t per_record = config_.max_query_bytes + 512;
  if (config_.block_capacity * per_record >= config_.enclave_memory_budget)
    throw Error(ErrorCode::Domain, "block capacity exceeds the enclave memory budget");
  if (config_.directory) {
    std::filesystem::create_directories(*config_.directory);
    sealed_ = load_blocks(*config_.directory, params_);
    if (!sealed_.empty()) last_proof_ = sealed_.back().block_proof;
  }
  open_.block_id = sealed_.empty() ? 1 : sealed_.back().block_id + 1;
  open_.created_at = start;
  open_.capacity = config_.block_capacity;
}

bool QueryLogger::append(QueryRecord record, Time now) {
  std::lock_guard lock(mutex_);
  if (record.query.size() > config_.max_query_bytes || !signature_valid(record, users_)) {
    ++security_events_;
    return false;
  }
  if (now >= open_.created_at + config_.max_block_age) seal_locked(now);
  if (open_.full()) seal_locked(now);
  append_query(open_, std::move(record), params_, users_);
  if (open_.full()) seal_locked(now);
  return true;
}

void QueryLogger::poll(Time now) {
  std::lock_guard lock(mutex_);
  if (now >= open_.created_at + config_.max_block_age) seal_locked(now);
}

void QueryLogger::seal(Time now) {
  std::lock_guard lock(mutex_);
  seal_locked(now);
}

void QueryLogger::seal_locked(Time now) {
  auto enc = seal_block(open_, last_proof_, params_, sdp_public_);
  if (config_.directory) detail::write_file_atomic(block_path(*config_.directory, enc.block_id), encode(enc, params_));
  last_proof_ = enc.block_proof;
  sealed_.push_back(std::move(enc));
  QueryBlock next;
  next.block_id = open_.block_id + 1;
  next.created_at = now;
  next.capacity = config_.block_capacity;
  open_ = std::move(next);
}

std::vector<EncryptedBlock> QueryLogger::sealed_blocks() const {
  std::lock_guard lock(mutex_);
  return sealed_;
}

std::optional<EncryptedBlock> QueryLogger::block(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  for (const auto& b : sealed_)
    if (b.block_id == id) return b;
  return std::nullopt;
}

std::size_t QueryLogger::security_events() const {
  std::lock_guard lock(mutex_);
  return security_events_;
}

std::size_t QueryLogger::open_records() const {
  std::lock_guard lock(mutex_);
  return open_.records.size();
}

std::filesystem::path QueryLogger::block_path(const std::filesystem::path& dir, std::uint64_t id) {
  return dir / fmt::format("block-{:012}.qlb", id);
}

std::vector<EncryptedBlock> QueryLogger::load_blocks(const std::filesystem::path& dir, const AccumulatorParams& params) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".qlb") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<EncryptedBlock> out;
  for (const auto& f : files) out.push_back(decode_encrypted_block(detail::read_file(f), params));
  return out;
}

}  // namespace expunge
