#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace expunge {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;

/// Milliseconds since the deployment's configured origin.
using Time = std::uint64_t;

enum class ErrorCode {
  Domain,          // argument outside an operation's domain
  Encoding,        // malformed or oversize canonical bytes
  EpochMismatch,   // reading does not belong to the target window
  Crypto,          // decryption/authentication or entropy failure
  Duplicate,       // epoch or block already present
  Inconsistent,    // rows or messages disagree with each other
  Expired,         // data no longer accessible under the retention policy
  Unauthorized,    // requester not on the provider list
  Unavailable,     // verification material purged
  NotFound,
  Protocol,        // malformed request/response or missing protocol field
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline ByteView as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline std::string to_hex(const Digest& d) { return to_hex(ByteView(d)); }

void append(Bytes& out, ByteView data);

}  // namespace expunge
