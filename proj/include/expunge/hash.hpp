#pragma once

#include <initializer_list>
#include <memory>
#include <optional>
#include <string_view>

#include "expunge/bytes.hpp"

namespace expunge {

/// Protocol-wide 256-bit hash. Every party in a deployment must use the same
/// algorithm; it is chosen once, before any protocol operation runs.
enum class HashAlgorithm { Sha256, Sha3_256 };

std::string_view to_string(HashAlgorithm alg) noexcept;
std::optional<HashAlgorithm> parse_hash_algorithm(std::string_view name) noexcept;

void set_hash_algorithm(HashAlgorithm alg) noexcept;
HashAlgorithm hash_algorithm() noexcept;

/// Incremental hasher over the configured algorithm.
class Hasher {
 public:
  Hasher();
  explicit Hasher(HashAlgorithm alg);
  ~Hasher();
  Hasher(Hasher&&) noexcept;
  Hasher& operator=(Hasher&&) noexcept;
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& update(ByteView data);
  Hasher& update(std::string_view text) { return update(as_bytes(text)); }
  Hasher& update(const Digest& d) { return update(ByteView(d)); }
  Hasher& update_u64(std::uint64_t v);

  /// Finalizes and resets, so the hasher can be reused.
  Digest finish();

  HashAlgorithm algorithm() const noexcept { return alg_; }

 private:
  struct Ctx;
  std::unique_ptr<Ctx> ctx_;
  HashAlgorithm alg_;
};

Digest hash(ByteView data);
Digest hash(std::initializer_list<ByteView> parts);

}  // namespace expunge
