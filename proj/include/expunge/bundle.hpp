#pragma once

#include <optional>
#include <vector>

#include "expunge/accumulator.hpp"
#include "expunge/control_phase.hpp"
#include "expunge/core_model.hpp"
#include "expunge/expunge_engine.hpp"

namespace expunge {

/// Everything a verifier receives for one epoch. Accessible bundles carry the
/// ciphertexts and E(aH); irrecoverable bundles carry the overwritten cells,
/// E(irH) and the stored deletion proof.
struct AttestationBundle {
  EpochWindow window;
  DataState state;
  std::vector<Digest> digests;
  std::vector<Bytes> ciphertexts;
  std::optional<CellArray> cells;
  AccumulatorValue crypto_time;
  std::optional<AccumulatorValue> prev_crypto_time;  // nullopt marks the first epoch
  Bytes enc_crypto_time;
  Bytes enc_state_tag;
  std::optional<DeletionProof> deletion_proof;
  Time served_at = 0;

  EpochId epoch_id() const noexcept { return window.id(); }
};

Bytes encode(const AttestationBundle& b, const AccumulatorParams& params);
AttestationBundle decode_bundle(ByteView in, const AccumulatorParams& params);

void write(canonical::Writer& w, const CellArray& cells);
CellArray read_cells(canonical::Reader& r);
void write(canonical::Writer& w, const DeletionProof& p);
DeletionProof read_proof(canonical::Reader& r);

}  // namespace expunge
