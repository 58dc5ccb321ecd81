#include "expunge/expunge_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include <sodium.h>

#include "expunge/canonical.hpp"
#include "expunge/hash.hpp"

namespace expunge {

namespace {

void expand(const Digest& seed, std::span<std::uint8_t> out, Hasher& h) {
  std::uint64_t counter = 0;
  std::size_t off = 0;
  while (off < out.size()) {
    auto block = h.update(seed).update_u64(counter++).finish();
    auto n = std::min(block.size(), out.size() - off);
    std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(off));
    off += n;
  }
}

}  // namespace

CellArray::CellArray(std::size_t cell_size, std::size_t count)
    : cell_size_(cell_size), count_(count), data_(cell_size * count) {}

std::size_t padded_cell_count(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::Domain, "cannot expunge an empty epoch");
  return std::max<std::size_t>(2, std::bit_ceil(n));
}

Bytes padding_cell(EpochId epoch, std::uint64_t index, std::size_t cell_size) {
  Hasher h;
  auto seed = h.update(std::string_view("PAD")).update_u64(epoch).update_u64(index).finish();
  Bytes out(cell_size);
  expand(seed, out, h);
  return out;
}

CellArray CellArray::from_ciphertexts(const std::vector<Bytes>& ciphertexts, EpochId epoch) {
  auto padded = padded_cell_count(ciphertexts.size());
  std::size_t max_len = 0;
  for (const auto& c : ciphertexts) max_len = std::max(max_len, c.size());
  CellArray out(4 + max_len, padded);
  for (std::size_t i = 0; i < ciphertexts.size(); ++i) {
    auto cell = out.cell(i);
    auto len = static_cast<std::uint32_t>(ciphertexts[i].size());
    cell[0] = static_cast<std::uint8_t>(len >> 24);
    cell[1] = static_cast<std::uint8_t>(len >> 16);
    cell[2] = static_cast<std::uint8_t>(len >> 8);
    cell[3] = static_cast<std::uint8_t>(len);
    std::copy(ciphertexts[i].begin(), ciphertexts[i].end(), cell.begin() + 4);
  }
  for (std::size_t i = ciphertexts.size(); i < padded; ++i) {
    auto pad = padding_cell(epoch, i, out.cell_size());
    std::copy(pad.begin(), pad.end(), out.cell(i).begin());
  }
  return out;
}

std::vector<Bytes> CellArray::to_cells() const {
  std::vector<Bytes> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) out.emplace_back(cell(i).begin(), cell(i).end());
  return out;
}

CellArray CellArray::from_cells(const std::vector<Bytes>& cells) {
  if (cells.empty()) throw Error(ErrorCode::Domain, "empty cell list");
  CellArray out(cells.front().size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != out.cell_size()) throw Error(ErrorCode::Encoding, "cells differ in length");
    std::copy(cells[i].begin(), cells[i].end(), out.cell(i).begin());
  }
  return out;
}

void combine(ByteView a, ByteView b, std::span<std::uint8_t> out) {
  if (a.size() != b.size() || out.size() != a.size())
    throw Error(ErrorCode::Domain, "combine requires equal-length cells");
  thread_local std::optional<Hasher> h;
  if (!h || h->algorithm() != hash_algorithm()) h.emplace();
  auto d = h->update(a).update(b).finish();
  expand(d, out, *h);
}

Bytes combine(ByteView a, ByteView b) {
  Bytes out(a.size());
  combine(a, b, out);
  return out;
}

ButterflySchedule::ButterflySchedule(std::size_t padded_count) : n_(padded_count) {
  if (n_ < 2 || !std::has_single_bit(n_)) throw Error(ErrorCode::Domain, "schedule needs a power-of-two count >= 2");
  for (std::size_t step = 1; step < n_; step *= 2) rounds_.push_back({2 * step, step});
}

std::vector<std::pair<std::size_t, std::size_t>> ButterflySchedule::pairs(std::size_t round) const {
  const auto [block, step] = rounds_.at(round);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n_ / 2);
  for (std::size_t start = 0; start < n_; start += block)
    for (std::size_t l = start; l < start + step; ++l) out.emplace_back(l, l + step);
  return out;
}

Digest proof_digest(const CellArray& cells) { return hash(cells.bytes()); }

ExpungeResult expunge(CellArray cells, EpochId epoch, Time produced_at, const ExpungeOptions& options) {
  const std::size_t n = cells.size();
  if (n == 0) throw Error(ErrorCode::Domain, "cannot expunge an empty epoch");
  ButterflySchedule schedule(n);
  CellArray temp(cells.cell_size(), n);

  for (std::size_t round = 0; round < schedule.iterations(); ++round) {
    auto pairs = schedule.pairs(round);
    if (options.on_pair)
      for (auto [l, r] : pairs) options.on_pair(round, l, r);

    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        auto [l, r] = pairs[k];
        auto out = temp.cell(l);
        combine(cells.cell(l), cells.cell(r), out);
        std::copy(out.begin(), out.end(), temp.cell(r).begin());
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(pairs.size())));
    if (threads == 1) {
      work(0, pairs.size());
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (pairs.size() + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        auto b = t * chunk;
        auto e = std::min(pairs.size(), b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
      }
    }
    std::swap(cells, temp);
  }
  // temp now holds the previous round (or the original ciphertexts when n == 2).
  sodium_memzero(temp.bytes().data(), temp.bytes().size());

  auto digest = proof_digest(cells);
  return ExpungeResult{std::move(cells), DeletionProof{epoch, digest, produced_at}};
}

namespace {

double work_units(std::size_t n, std::size_t cell_size) {
  const double rounds = std::max(1.0, std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 1)))));
  return static_cast<double>(n) * static_cast<double>(cell_size) * rounds;
}

double calibrated_ns_per_unit() {
  static std::once_flag once;
  static double ns_per_unit = 0;
  std::call_once(once, [] {
    constexpr std::size_t kCells = 1024;
    constexpr std::size_t kCellSize = 1024;
    std::vector<Bytes> cts(kCells, Bytes(kCellSize - 4, 0x5a));
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      auto cells = CellArray::from_ciphertexts(cts, 0);
      auto t0 = std::chrono::steady_clock::now();
      auto res = expunge(std::move(cells), 0, 0);
      auto dt = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
      best = std::min(best, dt);
    }
    ns_per_unit = best / work_units(kCells, kCellSize);
  });
  return ns_per_unit;
}

}  // namespace

std::chrono::nanoseconds expunge_duration_estimate(std::size_t n, std::size_t cell_size) {
  constexpr double kFixedOverheadNs = 1000.0;
  auto ns = kFixedOverheadNs + calibrated_ns_per_unit() * work_units(n, std::max<std::size_t>(cell_size, 1));
  return std::chrono::nanoseconds(static_cast<std::int64_t>(ns));
}

}  // namespace expunge
