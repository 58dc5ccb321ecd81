#include "expunge/services.hpp"

#include <fmt/format.h>

namespace expunge {

using Clock = std::chrono::steady_clock;

wire::Frame CloudService::handle(const wire::Frame& req) {
  const auto& params = store_.config().params;
  switch (req.type) {
    case wire::MessageType::Ingest:
      store_.ingest(wire::parse_ingest(req.body, params));
      return wire::empty_ok();
    case wire::MessageType::FetchSp: {
      auto q = wire::parse_fetch_sp(req.body);
      return wire::ciphertexts_response(store_.fetch_for_sp(q.sp_id, q.epoch, q.now));
    }
    case wire::MessageType::FetchBundle: {
      auto q = wire::parse_fetch_bundle(req.body);
      return wire::bundle_response(store_.fetch_bundle(q.t, q.now, q.include_cells), params);
    }
    case wire::MessageType::Tick:
      return wire::tick_response(store_.tick(wire::parse_tick(req.body)));
    case wire::MessageType::Ping:
      return wire::Frame{wire::MessageType::Ok, req.body};
    default:
      throw Error(ErrorCode::Protocol, fmt::format("cloud does not serve {}", wire::to_string(req.type)));
  }
}

wire::Frame SpService::handle(const wire::Frame& req) {
  switch (req.type) {
    case wire::MessageType::Query: {
      auto q = wire::parse_query(req.body);
      return wire::accepted_response(logger_.append(std::move(q.record), q.now));
    }
    case wire::MessageType::Audit: {
      auto id = wire::parse_audit(req.body);
      auto block = logger_.block(id);
      if (!block) throw Error(ErrorCode::NotFound, fmt::format("no sealed block {}", id));
      wire::AuditResponse resp{std::nullopt, std::move(*block)};
      if (id > 1) {
        auto prev = logger_.block(id - 1);
        if (!prev) throw Error(ErrorCode::NotFound, fmt::format("no sealed block {}", id - 1));
        resp.prev_proof = prev->block_proof;
      }
      if (tamper_ && !resp.block.encrypted_records.empty()) resp.block.encrypted_records.pop_back();
      return wire::audit_response(resp, params_);
    }
    case wire::MessageType::Ping:
      return wire::Frame{wire::MessageType::Ok, req.body};
    default:
      throw Error(ErrorCode::Protocol, fmt::format("SP does not serve {}", wire::to_string(req.type)));
  }
}

void CloudClient::ingest(const OutsourcePayload& payload) {
  wire::expect_ok(channel_.request(wire::ingest_request(payload, params_)));
}

std::vector<Bytes> CloudClient::fetch_for_sp(const std::string& sp_id, EpochId epoch, Time now) {
  auto resp = channel_.request(wire::fetch_sp_request({sp_id, epoch, now}));
  wire::expect_ok(resp);
  return wire::parse_ciphertexts(resp.body);
}

TimedBundle CloudClient::fetch_bundle(Time t, Time now, bool include_cells) {
  auto req = wire::fetch_bundle_request({t, now, include_cells});
  auto start = Clock::now();
  auto resp = channel_.request(req);
  auto elapsed = Clock::now() - start;
  wire::expect_ok(resp);
  TimedBundle out{wire::parse_bundle(resp.body, params_), elapsed, wire::kFrameHeaderSize + resp.body.size()};
  return out;
}

TickReport CloudClient::tick(Time now) {
  auto resp = channel_.request(wire::tick_request(now));
  wire::expect_ok(resp);
  return wire::parse_tick_report(resp.body);
}

std::chrono::nanoseconds CloudClient::round_trip(int samples) {
  const Bytes payload(64, 0);
  auto best = std::chrono::nanoseconds::max();
  for (int i = 0; i < std::max(samples, 1); ++i) {
    auto start = Clock::now();
    auto resp = channel_.request(wire::ping_request(payload));
    auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
    wire::expect_ok(resp);
    best = std::min(best, elapsed);
  }
  return best;
}

bool SpClient::log_query(const QueryRecord& record, Time now) {
  auto resp = channel_.request(wire::query_request({record, now}));
  wire::expect_ok(resp);
  return wire::parse_accepted(resp.body);
}

wire::AuditResponse SpClient::audit(std::uint64_t block_id) {
  auto resp = channel_.request(wire::audit_request(block_id));
  wire::expect_ok(resp);
  return wire::parse_audit_response(resp.body, params_);
}

}  // namespace expunge
