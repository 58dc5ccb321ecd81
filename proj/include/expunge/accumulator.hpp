#pragma once

#include <compare>
#include <memory>
#include <string>

#include "expunge/bytes.hpp"
#include "expunge/canonical.hpp"

struct bignum_st;
struct bn_mont_ctx_st;

namespace expunge {

/// Owning arbitrary-precision unsigned integer (OpenSSL BIGNUM).
class BigInt {
 public:
  BigInt();
  explicit BigInt(std::uint64_t v);
  BigInt(const BigInt& other);
  BigInt& operator=(const BigInt& other);
  BigInt(BigInt&&) noexcept = default;
  BigInt& operator=(BigInt&&) noexcept = default;
  ~BigInt();

  /// Unsigned big-endian.
  static BigInt from_bytes(ByteView be);
  static BigInt from_decimal(const std::string& dec);

  /// Minimal big-endian encoding (empty for zero).
  Bytes to_bytes() const;
  /// Big-endian, left-padded with zeros to exactly `width` bytes.
  Bytes to_bytes(std::size_t width) const;
  std::string to_decimal() const;

  int bits() const noexcept;
  bool is_zero() const noexcept;
  bool is_odd() const noexcept;

  friend bool operator==(const BigInt& a, const BigInt& b) noexcept;
  friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) noexcept;
  friend BigInt operator*(const BigInt& a, const BigInt& b);
  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt gcd(const BigInt& a, const BigInt& b);
  /// base^exp mod m; plain reference path, no Montgomery caching.
  friend BigInt mod_exp(const BigInt& base, const BigInt& exp, const BigInt& m);

  const bignum_st* get() const noexcept { return bn_.get(); }
  bignum_st* get() noexcept { return bn_.get(); }

 private:
  struct Free {
    void operator()(bignum_st* p) const noexcept;
  };
  std::unique_ptr<bignum_st, Free> bn_;
};

/// Accumulator exponent. Digests are mapped to integers big-endian and then
/// forced odd, so an exponent derived from a digest is never zero.
class Exponent {
 public:
  static Exponent from_digest(ByteView digest_bytes);
  static Exponent from_digest(const Digest& d) { return from_digest(ByteView(d)); }
  /// Exact integer exponent; rejects zero.
  static Exponent raw(BigInt e);
  static Exponent raw(std::uint64_t e) { return raw(BigInt(e)); }

  const BigInt& value() const noexcept { return value_; }

 private:
  explicit Exponent(BigInt v) : value_(std::move(v)) {}
  BigInt value_;
};

class AccumulatorParams;

/// Element of Z*_eta: a cryptographic timestamp CT_i or a block proof BProof_i.
class AccumulatorValue {
 public:
  /// Validates 0 < value < modulus.
  AccumulatorValue(BigInt value, const AccumulatorParams& params);

  const BigInt& value() const noexcept { return value_; }
  /// Fixed-width big-endian bytes (width = modulus byte length).
  Bytes to_bytes(const AccumulatorParams& params) const;
  static AccumulatorValue from_bytes(ByteView be, const AccumulatorParams& params);

  friend bool operator==(const AccumulatorValue& a, const AccumulatorValue& b) noexcept {
    return a.value_ == b.value_;
  }

 private:
  BigInt value_;
};

/// Public accumulator parameters (eta, x). The factors of eta are discarded
/// as soon as setup() returns.
class AccumulatorParams {
 public:
  static constexpr int kDefaultModulusBits = 2048;
  static constexpr int kMinModulusBits = 512;

  /// Draws two distinct modulus_bits/2-bit primes and a seed coprime to their
  /// product from the OpenSSL CSPRNG. Throws Error(Crypto) on entropy failure.
  static AccumulatorParams setup(int modulus_bits = kDefaultModulusBits);

  /// Test-only: accepts tiny hand-chosen primes (e.g. 61, 53). No size checks.
  static AccumulatorParams unsafe_from_primes(const BigInt& p, const BigInt& q, const BigInt& seed);

  /// Rebuilds params from their public wire form, checking 1 < x < eta and gcd(x, eta) = 1.
  static AccumulatorParams from_public(int modulus_bits, BigInt modulus, BigInt seed);

  const BigInt& modulus() const noexcept { return modulus_; }
  AccumulatorValue seed() const { return AccumulatorValue(seed_, *this); }
  int modulus_bits() const noexcept { return modulus_bits_; }
  std::size_t value_width() const noexcept { return static_cast<std::size_t>((modulus_bits_ + 7) / 8); }

  /// Montgomery context for the modulus, shared across copies.
  const bn_mont_ctx_st* mont() const noexcept { return mont_.get(); }

  friend bool operator==(const AccumulatorParams& a, const AccumulatorParams& b) noexcept {
    return a.modulus_bits_ == b.modulus_bits_ && a.modulus_ == b.modulus_ && a.seed_ == b.seed_;
  }

 private:
  AccumulatorParams(int bits, BigInt modulus, BigInt seed);

  int modulus_bits_;
  BigInt modulus_;
  BigInt seed_;
  std::shared_ptr<bn_mont_ctx_st> mont_;
};

/// prev^e mod eta.
AccumulatorValue step(const AccumulatorValue& prev, const Exponent& e, const AccumulatorParams& params);
/// Convenience: exponent derived from digest bytes. Throws Error(Domain) on empty input.
AccumulatorValue step(const AccumulatorValue& prev, ByteView exponent_bytes, const AccumulatorParams& params);

/// True iff step(prev, exponent_bytes) == claimed. Malformed input yields false.
bool verify_step(const AccumulatorValue& prev, ByteView exponent_bytes, const AccumulatorValue& claimed,
                 const AccumulatorParams& params) noexcept;

Bytes encode(const AccumulatorParams& params);
AccumulatorParams decode_params(ByteView in);
void write(canonical::Writer& w, const AccumulatorParams& params);
AccumulatorParams read_params(canonical::Reader& r);

}  // namespace expunge
