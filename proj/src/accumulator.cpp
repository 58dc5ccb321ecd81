#include "expunge/accumulator.hpp"

#include <openssl/bn.h>
#include <openssl/crypto.h>

namespace expunge {

namespace {

struct CtxFree {
  void operator()(BN_CTX* c) const noexcept { BN_CTX_free(c); }
};

BN_CTX* thread_ctx() {
  thread_local std::unique_ptr<BN_CTX, CtxFree> ctx(BN_CTX_new());
  if (!ctx) throw Error(ErrorCode::Crypto, "BN_CTX_new failed");
  return ctx.get();
}

void check(int rc, const char* what) {
  if (rc != 1) throw Error(ErrorCode::Crypto, what);
}

}  // namespace

void BigInt::Free::operator()(bignum_st* p) const noexcept { BN_free(p); }

BigInt::BigInt() : bn_(BN_new()) {
  if (!bn_) throw Error(ErrorCode::Crypto, "BN_new failed");
}

BigInt::BigInt(std::uint64_t v) : BigInt() { check(BN_set_word(bn_.get(), v), "BN_set_word failed"); }

BigInt::BigInt(const BigInt& other) : bn_(BN_dup(other.bn_.get())) {
  if (!bn_) throw Error(ErrorCode::Crypto, "BN_dup failed");
}

BigInt& BigInt::operator=(const BigInt& other) {
  if (this != &other) {
    if (!bn_) bn_.reset(BN_new());
    if (!BN_copy(bn_.get(), other.bn_.get())) throw Error(ErrorCode::Crypto, "BN_copy failed");
  }
  return *this;
}

BigInt::~BigInt() = default;

BigInt BigInt::from_bytes(ByteView be) {
  BigInt out;
  if (!BN_bin2bn(be.data(), static_cast<int>(be.size()), out.bn_.get()))
    throw Error(ErrorCode::Crypto, "BN_bin2bn failed");
  return out;
}

BigInt BigInt::from_decimal(const std::string& dec) {
  BIGNUM* raw = nullptr;
  if (BN_dec2bn(&raw, dec.c_str()) == 0 || BN_is_negative(raw)) {
    BN_free(raw);
    throw Error(ErrorCode::Encoding, "invalid decimal integer");
  }
  BigInt out;
  out.bn_.reset(raw);
  return out;
}

Bytes BigInt::to_bytes() const {
  Bytes out(static_cast<std::size_t>(BN_num_bytes(bn_.get())));
  BN_bn2bin(bn_.get(), out.data());
  return out;
}

Bytes BigInt::to_bytes(std::size_t width) const {
  Bytes out(width);
  if (BN_bn2binpad(bn_.get(), out.data(), static_cast<int>(width)) < 0)
    throw Error(ErrorCode::Encoding, "integer does not fit the requested width");
  return out;
}

std::string BigInt::to_decimal() const {
  char* s = BN_bn2dec(bn_.get());
  if (!s) throw Error(ErrorCode::Crypto, "BN_bn2dec failed");
  std::string out(s);
  OPENSSL_free(s);
  return out;
}

int BigInt::bits() const noexcept { return BN_num_bits(bn_.get()); }
bool BigInt::is_zero() const noexcept { return BN_is_zero(bn_.get()); }
bool BigInt::is_odd() const noexcept { return BN_is_odd(bn_.get()); }

bool operator==(const BigInt& a, const BigInt& b) noexcept { return BN_cmp(a.get(), b.get()) == 0; }

std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) noexcept {
  int c = BN_cmp(a.get(), b.get());
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

BigInt operator*(const BigInt& a, const BigInt& b) {
  BigInt out;
  check(BN_mul(out.get(), a.get(), b.get(), thread_ctx()), "BN_mul failed");
  return out;
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  BigInt out;
  check(BN_add(out.get(), a.get(), b.get()), "BN_add failed");
  return out;
}

BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt out;
  check(BN_gcd(out.get(), a.get(), b.get(), thread_ctx()), "BN_gcd failed");
  return out;
}

BigInt mod_exp(const BigInt& base, const BigInt& exp, const BigInt& m) {
  BigInt out;
  check(BN_mod_exp(out.get(), base.get(), exp.get(), m.get(), thread_ctx()), "BN_mod_exp failed");
  return out;
}

Exponent Exponent::from_digest(ByteView digest_bytes) {
  if (digest_bytes.empty()) throw Error(ErrorCode::Domain, "empty exponent bytes");
  auto v = BigInt::from_bytes(digest_bytes);
  check(BN_set_bit(v.get(), 0), "BN_set_bit failed");
  return Exponent(std::move(v));
}

Exponent Exponent::raw(BigInt e) {
  if (e.is_zero()) throw Error(ErrorCode::Domain, "accumulator exponent must be nonzero");
  return Exponent(std::move(e));
}

AccumulatorValue::AccumulatorValue(BigInt value, const AccumulatorParams& params) : value_(std::move(value)) {
  if (value_.is_zero() || !(value_ < params.modulus()))
    throw Error(ErrorCode::Domain, "accumulator value outside [1, modulus)");
}

Bytes AccumulatorValue::to_bytes(const AccumulatorParams& params) const { return value_.to_bytes(params.value_width()); }

AccumulatorValue AccumulatorValue::from_bytes(ByteView be, const AccumulatorParams& params) {
  if (be.size() != params.value_width()) throw Error(ErrorCode::Encoding, "accumulator value has wrong width");
  return AccumulatorValue(BigInt::from_bytes(be), params);
}

AccumulatorParams::AccumulatorParams(int bits, BigInt modulus, BigInt seed)
    : modulus_bits_(bits), modulus_(std::move(modulus)), seed_(std::move(seed)) {
  BN_MONT_CTX* m = BN_MONT_CTX_new();
  if (!m) throw Error(ErrorCode::Crypto, "BN_MONT_CTX_new failed");
  mont_.reset(m, BN_MONT_CTX_free);
  // Montgomery reduction needs an odd modulus; the unsafe test path may not have one.
  if (modulus_.is_odd()) check(BN_MONT_CTX_set(m, modulus_.get(), thread_ctx()), "BN_MONT_CTX_set failed");
  else mont_.reset();
}

namespace {

BigInt random_coprime_seed(const BigInt& modulus) {
  BigInt x;
  const BigInt one(1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    check(BN_rand_range(x.get(), modulus.get()), "entropy source failed while drawing the seed");
    if (x > one && gcd(x, modulus) == one) return x;
  }
  throw Error(ErrorCode::Crypto, "could not draw a seed coprime to the modulus");
}

}  // namespace

AccumulatorParams AccumulatorParams::setup(int modulus_bits) {
  if (modulus_bits < kMinModulusBits || modulus_bits % 2 != 0)
    throw Error(ErrorCode::Domain, "modulus_bits must be an even number >= 512");
  BigInt p, q;
  // Generated primes have their top two bits set, so p*q has exactly modulus_bits bits.
  check(BN_generate_prime_ex(p.get(), modulus_bits / 2, 0, nullptr, nullptr, nullptr), "prime generation failed");
  do {
    check(BN_generate_prime_ex(q.get(), modulus_bits / 2, 0, nullptr, nullptr, nullptr), "prime generation failed");
  } while (p == q);
  BigInt modulus = p * q;
  BN_clear(p.get());
  BN_clear(q.get());
  auto seed = random_coprime_seed(modulus);
  return AccumulatorParams(modulus_bits, std::move(modulus), std::move(seed));
}

AccumulatorParams AccumulatorParams::unsafe_from_primes(const BigInt& p, const BigInt& q, const BigInt& seed) {
  BigInt modulus = p * q;
  int bits = modulus.bits();
  return AccumulatorParams(bits, std::move(modulus), seed);
}

AccumulatorParams AccumulatorParams::from_public(int modulus_bits, BigInt modulus, BigInt seed) {
  const BigInt one(1);
  if (modulus.bits() != modulus_bits) throw Error(ErrorCode::Encoding, "modulus bit length mismatch");
  if (!(seed > one) || !(seed < modulus)) throw Error(ErrorCode::Domain, "seed outside (1, modulus)");
  if (!(gcd(seed, modulus) == one)) throw Error(ErrorCode::Domain, "seed not coprime to modulus");
  return AccumulatorParams(modulus_bits, std::move(modulus), std::move(seed));
}

AccumulatorValue step(const AccumulatorValue& prev, const Exponent& e, const AccumulatorParams& params) {
  BigInt out;
  if (params.mont()) {
    check(BN_mod_exp_mont(out.get(), prev.value().get(), e.value().get(), params.modulus().get(), thread_ctx(),
                          const_cast<BN_MONT_CTX*>(params.mont())),
          "modular exponentiation failed");
  } else {
    out = mod_exp(prev.value(), e.value(), params.modulus());
  }
  return AccumulatorValue(std::move(out), params);
}

AccumulatorValue step(const AccumulatorValue& prev, ByteView exponent_bytes, const AccumulatorParams& params) {
  return step(prev, Exponent::from_digest(exponent_bytes), params);
}

bool verify_step(const AccumulatorValue& prev, ByteView exponent_bytes, const AccumulatorValue& claimed,
                 const AccumulatorParams& params) noexcept {
  try {
    return step(prev, exponent_bytes, params) == claimed;
  } catch (...) {
    return false;
  }
}

void write(canonical::Writer& w, const AccumulatorParams& params) {
  w.u32(static_cast<std::uint32_t>(params.modulus_bits()));
  w.bytes(params.modulus().to_bytes(params.value_width()));
  w.bytes(params.seed().to_bytes(params));
}

AccumulatorParams read_params(canonical::Reader& r) {
  auto bits = static_cast<int>(r.u32());
  if (bits <= 0 || bits > 16384) throw Error(ErrorCode::Encoding, "unreasonable modulus size");
  auto modulus = BigInt::from_bytes(r.bytes(16384 / 8));
  auto seed = BigInt::from_bytes(r.bytes(16384 / 8));
  return AccumulatorParams::from_public(bits, std::move(modulus), std::move(seed));
}

Bytes encode(const AccumulatorParams& params) {
  canonical::Writer w(canonical::Tag::AccumulatorParams);
  write(w, params);
  return std::move(w).take();
}

AccumulatorParams decode_params(ByteView in) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::AccumulatorParams);
  auto p = read_params(r);
  r.finish();
  return p;
}

}  // namespace expunge
