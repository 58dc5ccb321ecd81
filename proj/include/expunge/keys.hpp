#pragma once

#include <array>
#include <map>
#include <string>

#include "expunge/bytes.hpp"
#include "expunge/canonical.hpp"

namespace expunge {

/// Calls sodium_init() once; safe to call from any thread.
void ensure_crypto_init();

inline constexpr std::size_t kBoxPublicKeySize = 32;
inline constexpr std::size_t kBoxSecretKeySize = 32;
inline constexpr std::size_t kSignPublicKeySize = 32;
inline constexpr std::size_t kSignSecretKeySize = 64;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kSymmetricKeySize = 32;

/// Bytes added by seal() on top of the plaintext (ephemeral key + MAC).
extern const std::size_t kSealOverhead;
/// Bytes added by ae_encrypt() on top of the plaintext (nonce + MAC).
extern const std::size_t kAeOverhead;

using BoxPublicKey = std::array<std::uint8_t, kBoxPublicKeySize>;
using SignPublicKey = std::array<std::uint8_t, kSignPublicKeySize>;
using Signature = std::array<std::uint8_t, kSignatureSize>;

struct BoxKeyPair {
  BoxPublicKey public_key{};
  std::array<std::uint8_t, kBoxSecretKeySize> secret_key{};

  static BoxKeyPair generate();
  ~BoxKeyPair();
};

struct SignKeyPair {
  SignPublicKey public_key{};
  std::array<std::uint8_t, kSignSecretKeySize> secret_key{};

  static SignKeyPair generate();
  ~SignKeyPair();
};

struct SymmetricKey {
  std::array<std::uint8_t, kSymmetricKeySize> bytes{};

  static SymmetricKey generate();
  ~SymmetricKey();
};

/// Non-deterministic hybrid encryption: a fresh ephemeral key agreement per
/// call, payload under authenticated encryption.
Bytes seal(const BoxPublicKey& recipient, ByteView plaintext);
/// Throws Error(Crypto) when the ciphertext does not authenticate.
Bytes open_sealed(const BoxKeyPair& recipient, ByteView ciphertext);

Bytes ae_encrypt(const SymmetricKey& key, ByteView plaintext);
Bytes ae_decrypt(const SymmetricKey& key, ByteView ciphertext);

Signature sign(const SignKeyPair& signer, ByteView message);
bool verify_signature(const SignPublicKey& signer, ByteView message, const Signature& sig) noexcept;

/// Everything the SDP distributes during key distribution and registration.
/// Private halves live here for the simulated roles only; no outsourced
/// payload ever contains them.
struct KeyRing {
  BoxKeyPair enclave;        // PK_E / PR_E
  BoxKeyPair sdp_box;        // PK_SDP / PR_SDP (encryption)
  SignKeyPair sdp_sign;      // SDP signature key
  SymmetricKey shared_key;   // K, shared by SDP and registered users
  std::map<std::string, SignKeyPair> user_signing;

  static KeyRing generate();
  const SignKeyPair& register_user(const std::string& user_id);
  /// Public keys of registered users, as the SDP and enclave see them.
  std::map<std::string, SignPublicKey> user_directory() const;
};

/// Local deployment state only (contains private keys).
Bytes encode(const KeyRing& keys);
KeyRing decode_keyring(ByteView in);

}  // namespace expunge
