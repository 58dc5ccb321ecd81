#include "expunge/keys.hpp"

#include <mutex>

#include <sodium.h>

namespace expunge {

const std::size_t kSealOverhead = crypto_box_SEALBYTES;
const std::size_t kAeOverhead = crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES;

static_assert(crypto_box_PUBLICKEYBYTES == kBoxPublicKeySize);
static_assert(crypto_box_SECRETKEYBYTES == kBoxSecretKeySize);
static_assert(crypto_sign_PUBLICKEYBYTES == kSignPublicKeySize);
static_assert(crypto_sign_SECRETKEYBYTES == kSignSecretKeySize);
static_assert(crypto_sign_BYTES == kSignatureSize);
static_assert(crypto_secretbox_KEYBYTES == kSymmetricKeySize);

void ensure_crypto_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(ErrorCode::Crypto, "libsodium initialisation failed");
  });
}

BoxKeyPair BoxKeyPair::generate() {
  ensure_crypto_init();
  BoxKeyPair kp;
  crypto_box_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

BoxKeyPair::~BoxKeyPair() { sodium_memzero(secret_key.data(), secret_key.size()); }

SignKeyPair SignKeyPair::generate() {
  ensure_crypto_init();
  SignKeyPair kp;
  crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

SignKeyPair::~SignKeyPair() { sodium_memzero(secret_key.data(), secret_key.size()); }

SymmetricKey SymmetricKey::generate() {
  ensure_crypto_init();
  SymmetricKey k;
  crypto_secretbox_keygen(k.bytes.data());
  return k;
}

SymmetricKey::~SymmetricKey() { sodium_memzero(bytes.data(), bytes.size()); }

Bytes seal(const BoxPublicKey& recipient, ByteView plaintext) {
  ensure_crypto_init();
  Bytes out(plaintext.size() + crypto_box_SEALBYTES);
  if (crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), recipient.data()) != 0)
    throw Error(ErrorCode::Crypto, "sealed-box encryption failed");
  return out;
}

Bytes open_sealed(const BoxKeyPair& recipient, ByteView ciphertext) {
  ensure_crypto_init();
  if (ciphertext.size() < crypto_box_SEALBYTES) throw Error(ErrorCode::Crypto, "ciphertext too short");
  Bytes out(ciphertext.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(), recipient.public_key.data(),
                           recipient.secret_key.data()) != 0)
    throw Error(ErrorCode::Crypto, "sealed-box authentication failed");
  return out;
}

Bytes ae_encrypt(const SymmetricKey& key, ByteView plaintext) {
  ensure_crypto_init();
  Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plaintext.size());
  randombytes_buf(out.data(), crypto_secretbox_NONCEBYTES);
  crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(), plaintext.size(), out.data(),
                        key.bytes.data());
  return out;
}

Bytes ae_decrypt(const SymmetricKey& key, ByteView ciphertext) {
  ensure_crypto_init();
  if (ciphertext.size() < kAeOverhead) throw Error(ErrorCode::Crypto, "ciphertext too short");
  Bytes out(ciphertext.size() - kAeOverhead);
  if (crypto_secretbox_open_easy(out.data(), ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                 ciphertext.size() - crypto_secretbox_NONCEBYTES, ciphertext.data(),
                                 key.bytes.data()) != 0)
    throw Error(ErrorCode::Crypto, "authenticated decryption failed");
  return out;
}

Signature sign(const SignKeyPair& signer, ByteView message) {
  ensure_crypto_init();
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), signer.secret_key.data());
  return sig;
}

bool verify_signature(const SignPublicKey& signer, ByteView message, const Signature& sig) noexcept {
  if (sodium_init() < 0) return false;
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), signer.data()) == 0;
}

KeyRing KeyRing::generate() {
  KeyRing k;
  k.enclave = BoxKeyPair::generate();
  k.sdp_box = BoxKeyPair::generate();
  k.sdp_sign = SignKeyPair::generate();
  k.shared_key = SymmetricKey::generate();
  return k;
}

const SignKeyPair& KeyRing::register_user(const std::string& user_id) {
  auto it = user_signing.find(user_id);
  if (it == user_signing.end()) it = user_signing.emplace(user_id, SignKeyPair::generate()).first;
  return it->second;
}

std::map<std::string, SignPublicKey> KeyRing::user_directory() const {
  std::map<std::string, SignPublicKey> out;
  for (const auto& [id, kp] : user_signing) out.emplace(id, kp.public_key);
  return out;
}

namespace {
template <std::size_t N>
void read_into(canonical::Reader& r, std::array<std::uint8_t, N>& out) {
  auto v = r.raw(N);
  std::copy(v.begin(), v.end(), out.begin());
}
}  // namespace

Bytes encode(const KeyRing& keys) {
  canonical::Writer w(canonical::Tag::KeyRing);
  w.raw(keys.enclave.public_key).raw(keys.enclave.secret_key);
  w.raw(keys.sdp_box.public_key).raw(keys.sdp_box.secret_key);
  w.raw(keys.sdp_sign.public_key).raw(keys.sdp_sign.secret_key);
  w.raw(keys.shared_key.bytes);
  w.u32(static_cast<std::uint32_t>(keys.user_signing.size()));
  for (const auto& [id, kp] : keys.user_signing) w.str(id).raw(kp.public_key).raw(kp.secret_key);
  return std::move(w).take();
}

KeyRing decode_keyring(ByteView in) {
  canonical::Reader r(in);
  r.expect_header(canonical::Tag::KeyRing);
  KeyRing k;
  read_into(r, k.enclave.public_key);
  read_into(r, k.enclave.secret_key);
  read_into(r, k.sdp_box.public_key);
  read_into(r, k.sdp_box.secret_key);
  read_into(r, k.sdp_sign.public_key);
  read_into(r, k.sdp_sign.secret_key);
  read_into(r, k.shared_key.bytes);
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto id = r.str(256);
    auto& kp = k.user_signing[id];
    read_into(r, kp.public_key);
    read_into(r, kp.secret_key);
  }
  r.finish();
  return k;
}

}  // namespace expunge
