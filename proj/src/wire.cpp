#include "expunge/wire.hpp"

#include "expunge/canonical.hpp"

namespace expunge::wire {

namespace {

using canonical::Reader;
using canonical::Tag;
using canonical::Writer;

constexpr std::uint8_t kLastErrorCode = static_cast<std::uint8_t>(ErrorCode::Io);

bool known_type(std::uint8_t t) {
  return (t >= 0x01 && t <= 0x07) || t == 0x80 || t == 0x81;
}

Reader open_body(ByteView body) {
  Reader r(body);
  r.expect_header(Tag::Message);
  return r;
}

Frame make(MessageType type, Writer&& w) { return Frame{type, std::move(w).take()}; }

}  // namespace

std::string_view to_string(MessageType t) noexcept {
  switch (t) {
    case MessageType::Ingest: return "INGEST";
    case MessageType::FetchSp: return "FETCH_SP";
    case MessageType::FetchBundle: return "FETCH_BUNDLE";
    case MessageType::Tick: return "TICK";
    case MessageType::Query: return "QUERY";
    case MessageType::Audit: return "AUDIT";
    case MessageType::Ping: return "PING";
    case MessageType::Ok: return "OK";
    case MessageType::Error: return "ERROR";
  }
  return "?";
}

Bytes encode_frame(const Frame& f) {
  if (f.body.size() > kMaxFrameBody) throw Error(ErrorCode::Encoding, "frame body too large");
  Bytes out;
  out.reserve(kFrameHeaderSize + f.body.size());
  const auto len = static_cast<std::uint32_t>(f.body.size() + 1);
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.push_back(static_cast<std::uint8_t>(f.type));
  out.insert(out.end(), f.body.begin(), f.body.end());
  return out;
}

std::pair<MessageType, std::size_t> parse_frame_header(ByteView header) {
  if (header.size() < kFrameHeaderSize) throw Error(ErrorCode::Protocol, "short frame header");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | header[i];
  if (len == 0) throw Error(ErrorCode::Protocol, "frame without a type byte");
  if (len - 1 > kMaxFrameBody) throw Error(ErrorCode::Protocol, "frame exceeds size limit");
  if (!known_type(header[4])) throw Error(ErrorCode::Protocol, "unknown message type");
  return {static_cast<MessageType>(header[4]), len - 1};
}

Frame decode_frame(ByteView in) {
  auto [type, len] = parse_frame_header(in);
  if (in.size() != kFrameHeaderSize + len) throw Error(ErrorCode::Protocol, "frame length mismatch");
  auto body = in.subspan(kFrameHeaderSize);
  return Frame{type, Bytes(body.begin(), body.end())};
}

Frame error_frame(ErrorCode code, std::string_view message) {
  Writer w(Tag::Message);
  w.u8(static_cast<std::uint8_t>(code)).str(message);
  return make(MessageType::Error, std::move(w));
}

void expect_ok(const Frame& f) {
  if (f.type == MessageType::Error) {
    auto r = open_body(f.body);
    auto code = r.u8();
    auto msg = r.str(1 << 16);
    if (code > kLastErrorCode) throw Error(ErrorCode::Protocol, "peer error: " + msg);
    throw Error(static_cast<ErrorCode>(code), msg);
  }
  if (f.type != MessageType::Ok)
    throw Error(ErrorCode::Protocol, "unexpected response type " + std::string(to_string(f.type)));
}

Frame ingest_request(const OutsourcePayload& p, const AccumulatorParams& params) {
  Writer w(Tag::Message);
  write(w, p.sensor, params);
  write(w, p.meta);
  return make(MessageType::Ingest, std::move(w));
}

OutsourcePayload parse_ingest(ByteView body, const AccumulatorParams& params) {
  auto r = open_body(body);
  auto sensor = read_sensor_row(r, params);
  auto meta = read_meta_row(r);
  r.finish();
  return OutsourcePayload{std::move(sensor), std::move(meta)};
}

Frame fetch_sp_request(const FetchSpRequest& q) {
  Writer w(Tag::Message);
  w.str(q.sp_id).u64(q.epoch).u64(q.now);
  return make(MessageType::FetchSp, std::move(w));
}

FetchSpRequest parse_fetch_sp(ByteView body) {
  auto r = open_body(body);
  FetchSpRequest q;
  q.sp_id = r.str(256);
  q.epoch = r.u64();
  q.now = r.u64();
  r.finish();
  return q;
}

Frame ciphertexts_response(const std::vector<Bytes>& cts) {
  Writer w(Tag::Message);
  w.u32(static_cast<std::uint32_t>(cts.size()));
  for (const auto& c : cts) w.bytes(c);
  return make(MessageType::Ok, std::move(w));
}

std::vector<Bytes> parse_ciphertexts(ByteView body) {
  auto r = open_body(body);
  auto n = r.u32();
  if (static_cast<std::uint64_t>(n) * 4 > r.remaining()) throw Error(ErrorCode::Encoding, "ciphertext count too large");
  std::vector<Bytes> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(r.bytes());
  r.finish();
  return out;
}

Frame fetch_bundle_request(const FetchBundleRequest& q) {
  Writer w(Tag::Message);
  w.u64(q.t).u64(q.now).boolean(q.include_cells);
  return make(MessageType::FetchBundle, std::move(w));
}

FetchBundleRequest parse_fetch_bundle(ByteView body) {
  auto r = open_body(body);
  FetchBundleRequest q;
  q.t = r.u64();
  q.now = r.u64();
  q.include_cells = r.boolean();
  r.finish();
  return q;
}

Frame bundle_response(const AttestationBundle& b, const AccumulatorParams& params) {
  return Frame{MessageType::Ok, encode(b, params)};
}

AttestationBundle parse_bundle(ByteView body, const AccumulatorParams& params) { return decode_bundle(body, params); }

Frame tick_request(Time now) {
  Writer w(Tag::Message);
  w.u64(now);
  return make(MessageType::Tick, std::move(w));
}

Time parse_tick(ByteView body) {
  auto r = open_body(body);
  auto now = r.u64();
  r.finish();
  return now;
}

Frame tick_response(const TickReport& rep) {
  Writer w(Tag::Message);
  w.u32(static_cast<std::uint32_t>(rep.transitions.size()));
  for (const auto& t : rep.transitions)
    w.u64(t.epoch).u8(static_cast<std::uint8_t>(t.from)).u8(static_cast<std::uint8_t>(t.to)).u64(t.at);
  w.u32(static_cast<std::uint32_t>(rep.failures.size()));
  for (const auto& f : rep.failures) w.u64(f.epoch).str(f.reason);
  return make(MessageType::Ok, std::move(w));
}

TickReport parse_tick_report(ByteView body) {
  auto r = open_body(body);
  TickReport rep;
  auto state = [&] {
    auto s = parse_data_state(r.u8());
    if (!s) throw Error(ErrorCode::Encoding, "bad state byte");
    return *s;
  };
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    StateTransition t{};
    t.epoch = r.u64();
    t.from = state();
    t.to = state();
    t.at = r.u64();
    rep.transitions.push_back(t);
  }
  auto m = r.u32();
  for (std::uint32_t i = 0; i < m; ++i) {
    TickFailure f;
    f.epoch = r.u64();
    f.reason = r.str(1 << 16);
    rep.failures.push_back(std::move(f));
  }
  r.finish();
  return rep;
}

Frame query_request(const QueryRequest& q) {
  Writer w(Tag::Message);
  w.bytes(encode(q.record)).u64(q.now);
  return make(MessageType::Query, std::move(w));
}

QueryRequest parse_query(ByteView body) {
  auto r = open_body(body);
  QueryRequest q;
  q.record = decode_query_record(r.bytes());
  q.now = r.u64();
  r.finish();
  return q;
}

Frame accepted_response(bool accepted) {
  Writer w(Tag::Message);
  w.boolean(accepted);
  return make(MessageType::Ok, std::move(w));
}

bool parse_accepted(ByteView body) {
  auto r = open_body(body);
  auto v = r.boolean();
  r.finish();
  return v;
}

Frame audit_request(std::uint64_t block_id) {
  Writer w(Tag::Message);
  w.u64(block_id);
  return make(MessageType::Audit, std::move(w));
}

std::uint64_t parse_audit(ByteView body) {
  auto r = open_body(body);
  auto id = r.u64();
  r.finish();
  return id;
}

Frame audit_response(const AuditResponse& a, const AccumulatorParams& params) {
  Writer w(Tag::Message);
  w.boolean(a.prev_proof.has_value());
  if (a.prev_proof) w.bytes(a.prev_proof->to_bytes(params));
  w.bytes(encode(a.block, params));
  return make(MessageType::Ok, std::move(w));
}

AuditResponse parse_audit_response(ByteView body, const AccumulatorParams& params) {
  auto r = open_body(body);
  std::optional<AccumulatorValue> prev;
  if (r.boolean()) prev = AccumulatorValue::from_bytes(r.bytes(params.value_width()), params);
  auto block = decode_encrypted_block(r.bytes(), params);
  r.finish();
  return AuditResponse{std::move(prev), std::move(block)};
}

Frame ping_request(ByteView payload) { return Frame{MessageType::Ping, Bytes(payload.begin(), payload.end())}; }

Frame empty_ok() { return make(MessageType::Ok, Writer(Tag::Message)); }

}  // namespace expunge::wire
