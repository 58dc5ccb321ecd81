#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expunge/bundle.hpp"
#include "expunge/cloud_store.hpp"
#include "expunge/query_log.hpp"

namespace expunge::wire {

/// A frame on the wire is u32 BE length || type || body, where the length
/// counts the type byte and the body.
enum class MessageType : std::uint8_t {
  Ingest = 0x01,
  FetchSp = 0x02,
  FetchBundle = 0x03,
  Tick = 0x04,
  Query = 0x05,
  Audit = 0x06,
  Ping = 0x07,
  Ok = 0x80,
  Error = 0x81,
};

std::string_view to_string(MessageType t) noexcept;

inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::size_t kMaxFrameBody = std::size_t{1} << 30;

struct Frame {
  MessageType type = MessageType::Ok;
  Bytes body;
};

Bytes encode_frame(const Frame& f);
/// Decodes exactly one complete frame.
Frame decode_frame(ByteView in);
/// Body length announced by a 5-byte frame header; validates the type byte.
std::pair<MessageType, std::size_t> parse_frame_header(ByteView header);

Frame error_frame(ErrorCode code, std::string_view message);
/// Throws the carried Error when f is an error frame, and Error(Protocol)
/// when f is not the expected success type.
void expect_ok(const Frame& f);

// Request and response bodies. Every body opens with the message header.

Frame ingest_request(const OutsourcePayload& p, const AccumulatorParams& params);
OutsourcePayload parse_ingest(ByteView body, const AccumulatorParams& params);

struct FetchSpRequest {
  std::string sp_id;
  EpochId epoch = 0;
  Time now = 0;
};
Frame fetch_sp_request(const FetchSpRequest& r);
FetchSpRequest parse_fetch_sp(ByteView body);
Frame ciphertexts_response(const std::vector<Bytes>& cts);
std::vector<Bytes> parse_ciphertexts(ByteView body);

struct FetchBundleRequest {
  Time t = 0;
  Time now = 0;
  bool include_cells = false;
};
Frame fetch_bundle_request(const FetchBundleRequest& r);
FetchBundleRequest parse_fetch_bundle(ByteView body);
Frame bundle_response(const AttestationBundle& b, const AccumulatorParams& params);
AttestationBundle parse_bundle(ByteView body, const AccumulatorParams& params);

Frame tick_request(Time now);
Time parse_tick(ByteView body);
Frame tick_response(const TickReport& r);
TickReport parse_tick_report(ByteView body);

struct QueryRequest {
  QueryRecord record;
  Time now = 0;
};
Frame query_request(const QueryRequest& r);
QueryRequest parse_query(ByteView body);
Frame accepted_response(bool accepted);
bool parse_accepted(ByteView body);

Frame audit_request(std::uint64_t block_id);
std::uint64_t parse_audit(ByteView body);
/// Block i together with BProof_{i-1} (absent for block 1).
struct AuditResponse {
  std::optional<AccumulatorValue> prev_proof;
  EncryptedBlock block;
};
Frame audit_response(const AuditResponse& r, const AccumulatorParams& params);
AuditResponse parse_audit_response(ByteView body, const AccumulatorParams& params);

Frame ping_request(ByteView payload);
Frame empty_ok();

}  // namespace expunge::wire
