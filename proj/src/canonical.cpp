#include "expunge/canonical.hpp"

#include <string>

namespace expunge::canonical {

std::array<std::uint8_t, 8> be64(std::uint64_t v) noexcept {
  std::array<std::uint8_t, 8> out{};
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return out;
}

Writer& Writer::header(Tag tag) {
  out_.push_back(kMagic);
  out_.push_back(kVersion);
  out_.push_back(static_cast<std::uint8_t>(tag));
  return *this;
}

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  auto be = be64(v);
  out_.insert(out_.end(), be.begin(), be.end());
  return *this;
}

Writer& Writer::bytes(ByteView v) {
  if (v.size() > UINT32_MAX) throw Error(ErrorCode::Encoding, "field exceeds u32 length prefix");
  u32(static_cast<std::uint32_t>(v.size()));
  return raw(v);
}

Writer& Writer::digest(const Digest& d) { return raw(ByteView(d)); }

Writer& Writer::raw(ByteView v) {
  out_.insert(out_.end(), v.begin(), v.end());
  return *this;
}

void Reader::need(std::size_t n) const {
  if (remaining() < n)
    throw Error(ErrorCode::Encoding, "truncated record: need " + std::to_string(n) + " bytes, have " +
                                         std::to_string(remaining()));
}

void Reader::expect_header(Tag tag) {
  need(kHeaderSize);
  if (in_[pos_] != kMagic) throw Error(ErrorCode::Encoding, "bad magic byte");
  if (in_[pos_ + 1] != kVersion) throw Error(ErrorCode::Encoding, "unsupported layout version");
  if (in_[pos_ + 2] != static_cast<std::uint8_t>(tag))
    throw Error(ErrorCode::Encoding, "unexpected record tag " + std::to_string(in_[pos_ + 2]));
  pos_ += kHeaderSize;
}

Tag Reader::peek_tag() const {
  need(kHeaderSize);
  return static_cast<Tag>(in_[pos_ + 2]);
}

std::uint8_t Reader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

bool Reader::boolean() {
  auto v = u8();
  if (v > 1) throw Error(ErrorCode::Encoding, "non-canonical boolean");
  return v == 1;
}

Bytes Reader::bytes(std::size_t max_len) {
  auto len = u32();
  if (len > max_len) throw Error(ErrorCode::Encoding, "field length exceeds maximum");
  auto v = raw(len);
  return Bytes(v.begin(), v.end());
}

std::string Reader::str(std::size_t max_len) {
  auto b = bytes(max_len);
  return std::string(b.begin(), b.end());
}

Digest Reader::digest() {
  Digest d{};
  auto v = raw(kDigestSize);
  std::copy(v.begin(), v.end(), d.begin());
  return d;
}

ByteView Reader::raw(std::size_t n) {
  need(n);
  auto v = in_.subspan(pos_, n);
  pos_ += n;
  return v;
}

void Reader::finish() const {
  if (!done()) throw Error(ErrorCode::Encoding, "trailing bytes after record");
}

}  // namespace expunge::canonical
