#pragma once

#include <chrono>
#include <string>

#include "expunge/cloud_store.hpp"
#include "expunge/query_log.hpp"
#include "expunge/transport.hpp"

namespace expunge {

/// Cloud role: serves INGEST, FETCH_SP, FETCH_BUNDLE, TICK and PING.
class CloudService {
 public:
  explicit CloudService(CloudStore& store) : store_(store) {}
  wire::Frame handle(const wire::Frame& request);
  Handler handler() {
    return [this](const wire::Frame& f) { return handle(f); };
  }

 private:
  CloudStore& store_;
};

/// SP role: logs user queries through the enclave logger and serves AUDIT.
class SpService {
 public:
  /// With `tamper` set the SP drops the last record of every block it hands
  /// out for audit (fault injection).
  SpService(QueryLogger& logger, AccumulatorParams params, bool tamper = false)
      : logger_(logger), params_(std::move(params)), tamper_(tamper) {}
  wire::Frame handle(const wire::Frame& request);
  Handler handler() {
    return [this](const wire::Frame& f) { return handle(f); };
  }

 private:
  QueryLogger& logger_;
  AccumulatorParams params_;
  bool tamper_;
};

struct TimedBundle {
  AttestationBundle bundle;
  /// Request sent to response received; excludes any local verification.
  std::chrono::nanoseconds transport{0};
  std::size_t wire_bytes = 0;
};

class CloudClient {
 public:
  CloudClient(Channel& channel, AccumulatorParams params) : channel_(channel), params_(std::move(params)) {}

  void ingest(const OutsourcePayload& payload);
  std::vector<Bytes> fetch_for_sp(const std::string& sp_id, EpochId epoch, Time now);
  TimedBundle fetch_bundle(Time t, Time now, bool include_cells = false);
  TickReport tick(Time now);
  /// Best of `samples` PING round trips.
  std::chrono::nanoseconds round_trip(int samples = 5);

 private:
  Channel& channel_;
  AccumulatorParams params_;
};

class SpClient {
 public:
  SpClient(Channel& channel, AccumulatorParams params) : channel_(channel), params_(std::move(params)) {}

  bool log_query(const QueryRecord& record, Time now);
  wire::AuditResponse audit(std::uint64_t block_id);

 private:
  Channel& channel_;
  AccumulatorParams params_;
};

}  // namespace expunge
