#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "expunge/bytes.hpp"
#include "expunge/core_model.hpp"

namespace expunge {

/// Fixed-size cells holding an epoch's ciphertexts, contiguous in memory.
/// Each ciphertext is stored as a u32 big-endian length, the ciphertext, then
/// zero fill; the array is extended with deterministic padding cells up to a
/// power of two (at least two cells, so every cell is overwritten at least once).
class CellArray {
 public:
  CellArray(std::size_t cell_size, std::size_t count);

  /// Throws Error(Domain) for an empty list.
  static CellArray from_ciphertexts(const std::vector<Bytes>& ciphertexts, EpochId epoch);

  std::size_t cell_size() const noexcept { return cell_size_; }
  std::size_t size() const noexcept { return count_; }
  ByteView cell(std::size_t i) const noexcept { return ByteView(data_).subspan(i * cell_size_, cell_size_); }
  std::span<std::uint8_t> cell(std::size_t i) noexcept {
    return std::span<std::uint8_t>(data_).subspan(i * cell_size_, cell_size_);
  }
  ByteView bytes() const noexcept { return data_; }
  std::span<std::uint8_t> bytes() noexcept { return data_; }

  std::vector<Bytes> to_cells() const;
  static CellArray from_cells(const std::vector<Bytes>& cells);

  friend bool operator==(const CellArray&, const CellArray&) = default;

 private:
  std::size_t cell_size_;
  std::size_t count_;
  Bytes data_;
};

/// Number of cells after padding n ciphertexts.
std::size_t padded_cell_count(std::size_t n);

/// Padding cell `index` of an epoch: Hash("PAD" || epoch || index) expanded to cell_size.
Bytes padding_cell(EpochId epoch, std::uint64_t index, std::size_t cell_size);

/// One-way combination of two equal-length cells: d = Hash(a || b), output is
/// Hash(d || 0) || Hash(d || 1) || ... truncated to the cell length.
void combine(ByteView a, ByteView b, std::span<std::uint8_t> out);
Bytes combine(ByteView a, ByteView b);

struct ButterflyRound {
  std::size_t block_size;
  std::size_t step_size;
};

/// Rounds of the transform for a padded power-of-two cell count.
class ButterflySchedule {
 public:
  explicit ButterflySchedule(std::size_t padded_count);

  const std::vector<ButterflyRound>& rounds() const noexcept { return rounds_; }
  std::size_t iterations() const noexcept { return rounds_.size(); }
  std::size_t cell_count() const noexcept { return n_; }

  /// 0-based index pairs (l, l + step) combined in one round.
  std::vector<std::pair<std::size_t, std::size_t>> pairs(std::size_t round) const;

 private:
  std::size_t n_;
  std::vector<ButterflyRound> rounds_;
};

struct DeletionProof {
  EpochId epoch_id = 0;
  Digest proof{};
  Time produced_at = 0;

  friend bool operator==(const DeletionProof&, const DeletionProof&) = default;
};

struct ExpungeOptions {
  unsigned threads = 1;
  /// Called for every combined pair as (round, left, right), 0-based.
  std::function<void(std::size_t, std::size_t, std::size_t)> on_pair;
};

struct ExpungeResult {
  CellArray cells;
  DeletionProof proof;
};

/// Runs the memory-hard overwrite over all cells and hashes the result.
/// The input buffer is consumed and scrubbed; only the final cells survive.
ExpungeResult expunge(CellArray cells, EpochId epoch, Time produced_at, const ExpungeOptions& options = {});

/// Hash(cell_1 || ... || cell_n).
Digest proof_digest(const CellArray& cells);

/// Host-calibrated runtime estimate for expunging n ciphertext cells of the
/// given size. Calibration runs once per process.
std::chrono::nanoseconds expunge_duration_estimate(std::size_t n, std::size_t cell_size);

}  // namespace expunge
