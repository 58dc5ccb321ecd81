#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "expunge/bytes.hpp"

namespace expunge::canonical {

// Every top-level record starts with kMagic, kVersion and a record tag.
// Fields follow in declaration order: integers are fixed-width big-endian,
// variable-length byte strings carry a u32 big-endian length prefix, digests
// are written as their fixed 32 bytes. See docs/canonical-layout.md.
inline constexpr std::uint8_t kMagic = 0xE5;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 3;

enum class Tag : std::uint8_t {
  SensorReading = 0x01,
  EpochWindow = 0x02,
  RetentionPolicy = 0x03,
  AccumulatorParams = 0x04,
  ReadingPlaintext = 0x05,
  SensorDataRow = 0x10,
  MetaDataRow = 0x11,
  EpochSegment = 0x12,
  DeletionProof = 0x13,
  AttestationBundle = 0x14,
  QueryRecord = 0x20,
  QueryBlock = 0x21,
  KeyRing = 0x30,
  Deployment = 0x31,
  Message = 0x40,
};

class Writer {
 public:
  Writer() = default;
  explicit Writer(Tag tag) { header(tag); }

  Writer& header(Tag tag);
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& boolean(bool v) { return u8(v ? 1 : 0); }
  Writer& bytes(ByteView v);
  Writer& str(std::string_view v) { return bytes(as_bytes(v)); }
  Writer& digest(const Digest& d);
  /// Appends without a length prefix; only for fixed-layout regions.
  Writer& raw(ByteView v);

  std::size_t size() const noexcept { return out_.size(); }
  const Bytes& view() const noexcept { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  /// Consumes and checks magic, version and tag.
  void expect_header(Tag tag);
  Tag peek_tag() const;

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  bool boolean();
  Bytes bytes(std::size_t max_len = SIZE_MAX);
  std::string str(std::size_t max_len = SIZE_MAX);
  Digest digest();
  ByteView raw(std::size_t n);

  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }
  bool done() const noexcept { return remaining() == 0; }
  /// Throws unless every byte was consumed.
  void finish() const;

 private:
  void need(std::size_t n) const;

  ByteView in_;
  std::size_t pos_ = 0;
};

std::array<std::uint8_t, 8> be64(std::uint64_t v) noexcept;

}  // namespace expunge::canonical
