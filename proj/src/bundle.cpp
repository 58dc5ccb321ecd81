#include "expunge/bundle.hpp"

namespace expunge {

void write(canonical::Writer& w, const CellArray& cells) {
  w.u32(static_cast<std::uint32_t>(cells.size())).u32(static_cast<std::uint32_t>(cells.cell_size()));
  w.raw(cells.bytes());
}

CellArray read_cells(canonical::Reader& r) {
  auto count = r.u32();
  auto size = r.u32();
  if (count == 0 || size == 0 || static_cast<std::uint64_t>(count) * size > r.remaining())
    throw Error(ErrorCode::Encoding, "cell array exceeds record");
  CellArray cells(size, count);
  auto raw = r.raw(static_cast<std::size_t>(count) * size);
  std::copy(raw.begin(), raw.end(), cells.bytes().begin());
  return cells;
}

void write(canonical::Writer& w, const DeletionProof& p) { w.u64(p.epoch_id).digest(p.proof).u64(p.produced_at); }

DeletionProof read_proof(canonical::Reader& r) {
  DeletionProof p;
  p.epoch_id = r.u64();
  p.proof = r.digest();
  p.produced_at = r.u64();
  return p;
}

Bytes encode(const AttestationBundle& b, const AccumulatorParams& params) {
  canonical::Writer w(canonical::Tag::AttestationBundle);
  write(w, b.window);
  w.u8(static_cast<std::uint8_t>(b.state));
  w.u32(static_cast<std::uint32_t>(b.digests.size()));
  for (const auto& d : b.digests) w.digest(d);
  w.u32(static_cast<std::uint32_t>(b.ciphertexts.size()));
  for (const auto& c : b.ciphertexts) w.bytes(c);
  w.boolean(b.cells.has_value());
  if (b.cells) write(w, *b.cells);
  w.bytes(b.crypto_time.to_bytes(params));
  w.boolean(b.prev_crypto_time.has_value());
  if (b.prev_crypto_time) w.bytes(b.prev_crypto_time->to_bytes(params));
  w.bytes(b.enc_crypto_time).bytes(b.enc_state_tag);
  w.boolean(b.deletion_proof.has_value());
  if (b.deletion_proof) write(w, *b.deletion_proof);
  w.u64(b.served_at);
  return std::move(w).take();
}

AttestationBundle decode_bundle(ByteView in, const AccumulatorParams& params) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::AttestationBundle);
  auto window = read_window(r);
  auto state = parse_data_state(r.u8());
  if (!state) throw Error(ErrorCode::Encoding, "invalid data state");
  auto nd = r.u32();
  if (static_cast<std::uint64_t>(nd) * kDigestSize > r.remaining()) throw Error(ErrorCode::Encoding, "digest count");
  std::vector<Digest> digests;
  digests.reserve(nd);
  for (std::uint32_t i = 0; i < nd; ++i) digests.push_back(r.digest());
  auto nc = r.u32();
  if (static_cast<std::uint64_t>(nc) * 4 > r.remaining()) throw Error(ErrorCode::Encoding, "ciphertext count");
  std::vector<Bytes> cts;
  cts.reserve(nc);
  for (std::uint32_t i = 0; i < nc; ++i) cts.push_back(r.bytes());
  std::optional<CellArray> cells;
  if (r.boolean()) cells = read_cells(r);
  auto ct = AccumulatorValue::from_bytes(r.bytes(params.value_width()), params);
  std::optional<AccumulatorValue> prev;
  if (r.boolean()) prev = AccumulatorValue::from_bytes(r.bytes(params.value_width()), params);
  auto enc_ct = r.bytes(4096);
  auto enc_tag = r.bytes(4096);
  std::optional<DeletionProof> proof;
  if (r.boolean()) proof = read_proof(r);
  auto served = r.u64();
  r.finish();
  return AttestationBundle{window,         *state,        std::move(digests), std::move(cts),
                           std::move(cells), std::move(ct), std::move(prev),    std::move(enc_ct),
                           std::move(enc_tag), proof,       served};
}

}  // namespace expunge
