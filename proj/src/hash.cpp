#include "expunge/hash.hpp"

#include <atomic>

#include <openssl/evp.h>

namespace expunge {

namespace {
std::atomic<HashAlgorithm> g_algorithm{HashAlgorithm::Sha256};

const EVP_MD* md_for(HashAlgorithm alg) {
  return alg == HashAlgorithm::Sha256 ? EVP_sha256() : EVP_sha3_256();
}
}  // namespace

std::string_view to_string(HashAlgorithm alg) noexcept {
  return alg == HashAlgorithm::Sha256 ? "sha256" : "sha3-256";
}

std::optional<HashAlgorithm> parse_hash_algorithm(std::string_view name) noexcept {
  if (name == "sha256" || name == "sha-256") return HashAlgorithm::Sha256;
  if (name == "sha3-256") return HashAlgorithm::Sha3_256;
  return std::nullopt;
}

void set_hash_algorithm(HashAlgorithm alg) noexcept { g_algorithm.store(alg); }
HashAlgorithm hash_algorithm() noexcept { return g_algorithm.load(); }

struct Hasher::Ctx {
  EVP_MD_CTX* md = nullptr;
  ~Ctx() { EVP_MD_CTX_free(md); }
};

Hasher::Hasher() : Hasher(hash_algorithm()) {}

Hasher::Hasher(HashAlgorithm alg) : ctx_(std::make_unique<Ctx>()), alg_(alg) {
  ctx_->md = EVP_MD_CTX_new();
  if (ctx_->md == nullptr || EVP_DigestInit_ex(ctx_->md, md_for(alg_), nullptr) != 1)
    throw Error(ErrorCode::Crypto, "hash context initialisation failed");
}

Hasher::~Hasher() = default;
Hasher::Hasher(Hasher&&) noexcept = default;
Hasher& Hasher::operator=(Hasher&&) noexcept = default;

Hasher& Hasher::update(ByteView data) {
  if (!data.empty()) EVP_DigestUpdate(ctx_->md, data.data(), data.size());
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 7; i >= 0; --i) {
    be[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return update(ByteView(be));
}

Digest Hasher::finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx_->md, out.data(), &len);
  EVP_DigestInit_ex(ctx_->md, md_for(alg_), nullptr);
  return out;
}

Digest hash(ByteView data) { return Hasher{}.update(data).finish(); }

Digest hash(std::initializer_list<ByteView> parts) {
  Hasher h;
  for (auto p : parts) h.update(p);
  return h.finish();
}

}  // namespace expunge
