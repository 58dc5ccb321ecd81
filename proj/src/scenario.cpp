#include "expunge/scenario.hpp"

#include <chrono>
#include <memory>

#include <fmt/format.h>

#include "expunge/control_phase.hpp"
#include "expunge/generator.hpp"
#include "expunge/services.hpp"
#include "file_io.hpp"

namespace expunge {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(std::chrono::nanoseconds d) { return std::chrono::duration<double>(d).count(); }

template <typename F>
std::chrono::nanoseconds timed(F&& f) {
  auto start = Clock::now();
  f();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
}

std::vector<std::string> make_user_ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(fmt::format("user-{}", i));
  return out;
}

}  // namespace

Deployment Deployment::create(const ScenarioConfig& config) {
  config.validate();
  set_hash_algorithm(config.hash);
  Deployment d{config, KeyRing::generate(), AccumulatorParams::setup(config.modulus_bits)};
  for (const auto& u : make_user_ids(config.users)) d.keys.register_user(u);
  return d;
}

void Deployment::save() const {
  if (!config.workdir) throw Error(ErrorCode::Domain, "deployment has no workdir");
  std::filesystem::create_directories(*config.workdir);
  auto text = to_json(config);
  detail::write_file_atomic(*config.workdir / "config.json", as_bytes(text));
  detail::write_file_atomic(*config.workdir / "keys.bin", encode(keys));
  detail::write_file_atomic(*config.workdir / "params.bin", encode(params));
}

Deployment Deployment::load(const std::filesystem::path& dir) {
  auto config = load_config(dir / "config.json");
  config.workdir = dir;
  set_hash_algorithm(config.hash);
  return Deployment{config, decode_keyring(detail::read_file(dir / "keys.bin")),
                    decode_params(detail::read_file(dir / "params.bin"))};
}

CloudConfig Deployment::cloud_config() const {
  CloudConfig c{config.policy(), params, {kSpId}, std::nullopt, config.lazy_cloud, false};
  if (config.workdir) c.directory = *config.workdir / "cloud";
  return c;
}

QueryLoggerConfig Deployment::logger_config() const {
  QueryLoggerConfig c;
  c.block_capacity = config.block_capacity;
  c.max_block_age = config.block_max_age;
  if (config.workdir) c.directory = *config.workdir / "querylog";
  return c;
}

std::vector<std::string> Deployment::user_ids() const { return make_user_ids(config.users); }

std::size_t Deployment::expected_cell_size() const {
  return 4 + reading_ciphertext_size(kMaxDeviceIdSize, config.payload_bytes);
}

json to_json(const VerificationReport& r) {
  json j;
  j["epoch"] = r.epoch_id;
  j["state"] = std::string(to_string(r.state_claimed));
  j["expected_state"] = std::string(to_string(r.state_expected));
  j["verified"] = r.verified();
  j["checks"] = {{"request", r.request_ok},
                 {"completeness", r.completeness_ok},
                 {"tag", r.tag_ok},
                 {"policy", r.policy_ok},
                 {"state", r.state_ok}};
  if (r.membership_checked) j["membership_positions"] = r.membership_positions;
  if (r.proof_matches) j["proof_matches"] = *r.proof_matches;
  if (!r.error.empty()) j["error"] = r.error;
  j["timing"] = {{"response_ns", r.response_time.count()},
                 {"tau_ns", r.time_bound_limit.count()},
                 {"time_bound", std::string(to_string(r.time_bound))}};
  return j;
}

json to_json(const AuditVerdict& v) {
  json j;
  j["block"] = v.block_id;
  j["ok"] = v.ok();
  j["records"] = v.record_count;
  j["decrypt_ok"] = v.decrypt_ok;
  j["proof_matches"] = v.proof_matches;
  j["bad_signatures"] = v.bad_signatures;
  if (!v.error.empty()) j["error"] = v.error;
  return j;
}

json strip_timing(const json& transcript) {
  if (transcript.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : transcript.items())
      if (k != "timing") out[k] = strip_timing(v);
    return out;
  }
  if (transcript.is_array()) {
    json out = json::array();
    for (const auto& v : transcript) out.push_back(strip_timing(v));
    return out;
  }
  return transcript;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  auto d = Deployment::create(config);
  if (config.workdir) d.save();
  return run_scenario(d);
}

ScenarioResult run_scenario(Deployment& d) {
  const auto& c = d.config;
  c.validate_for_scenario();
  set_hash_algorithm(c.hash);

  ScenarioResult result;
  result.report.metadata = run_metadata(c);
  auto& events = result.transcript;

  CloudStore store(d.cloud_config());
  CloudService cloud_service(store);
  // Queries start once the first epoch has been outsourced.
  QueryLogger logger(d.logger_config(), d.params, d.keys.sdp_box.public_key, d.keys.user_directory(),
                     c.origin + c.delta);
  SpService sp_service(logger, d.params, c.tampering_sp);

  std::unique_ptr<TcpServer> cloud_server, sp_server;
  if (c.transport == TransportKind::Tcp) {
    cloud_server = std::make_unique<TcpServer>(cloud_service.handler());
    sp_server = std::make_unique<TcpServer>(sp_service.handler());
  }
  auto channel_to = [&](CloudService* cs, SpService* ss) -> std::unique_ptr<Channel> {
    if (c.transport == TransportKind::Tcp) return std::make_unique<TcpChannel>(cs ? cloud_server->port() : sp_server->port());
    return std::make_unique<LoopbackChannel>(cs ? cs->handler() : ss->handler());
  };
  // One channel per role pair, as separate processes would have.
  auto sdp_to_cloud = channel_to(&cloud_service, nullptr);
  auto sp_to_cloud = channel_to(&cloud_service, nullptr);
  auto user_to_cloud = channel_to(&cloud_service, nullptr);
  auto user_to_sp = channel_to(nullptr, &sp_service);
  auto sdp_to_sp = channel_to(nullptr, &sp_service);
  CloudClient sdp_cloud(*sdp_to_cloud, d.params);
  CloudClient sp_cloud(*sp_to_cloud, d.params);
  CloudClient user_cloud(*user_to_cloud, d.params);
  SpClient user_sp(*user_to_sp, d.params);
  SpClient sdp_sp(*sdp_to_sp, d.params);

  const auto users = d.user_ids();
  const auto cell_size = d.expected_cell_size();
  const auto policy = c.policy();

  ControlPhase control(d.params, ControlKeys{d.keys.enclave.public_key, d.keys.shared_key});
  auto batches = split_into_epochs(c, generate_readings(c, c.seed));
  for (const auto& b : batches)
    for (const auto& r : b.readings) result.report.raw_bytes += encoded_size(r);

  std::map<EpochId, const EpochBatch*> by_id;
  for (const auto& b : batches) by_id[b.window.id()] = &b;

  ControlTimings control_total;
  std::chrono::nanoseconds ingest_time{0}, tick_time{0}, verify_time{0}, transfer_time{0};
  std::size_t transfers = 0;
  const auto rtt = user_cloud.round_trip(9);
  result.report.add("scenario", "loopback", "round_trip", seconds(rtt));

  auto verify_epoch = [&](const EpochBatch& b, Time now, const char* reason) {
    auto tb = user_cloud.fetch_bundle(b.window.bt(), now);
    transfer_time += tb.transport;
    ++transfers;
    const auto bound = calibrate_time_bound(rtt, tb.bundle.digests.size(), cell_size);
    VerifyContext ctx{d.params, d.keys.shared_key, policy, b.window.bt(), tb.transport, bound, now};
    auto record = [&](const char* role, const VerificationReport& rep) {
      ++result.verifications;
      if (!rep.verified()) ++result.verification_failures;
      if (rep.time_bound == TimeBoundOutcome::Violated) ++result.time_bound_violations;
      auto j = to_json(rep);
      j["event"] = "verify";
      j["role"] = role;
      j["reason"] = reason;
      j["at"] = now;
      events.push_back(std::move(j));
    };
    verify_time += timed([&] {
      if (!b.readings.empty()) record("user", verify_as_user(b.readings.front().device_id, tb.bundle, ctx));
      record("sdp", verify_as_sdp(tb.bundle, ctx));
    });
  };

  try {
    std::size_t query_seq = 0;
    for (const auto& batch : batches) {
      const Time now = batch.window.et();
      const EpochId id = batch.window.id();

      // SDP: control phase, then outsource.
      ControlTimings tm;
      auto payload = control.process(batch.window, batch.readings, &tm);
      control_total += tm;
      ingest_time += timed([&] { sdp_cloud.ingest(payload); });
      events.push_back({{"event", "ingest"}, {"epoch", id}, {"at", now}, {"readings", batch.readings.size()}});

      // Clock: the cloud enforces the policy; the logger checks block age once this epoch's queries are in.
      TickReport tick;
      tick_time += timed([&] { tick = sdp_cloud.tick(now); });
      for (const auto& t : tick.transitions)
        events.push_back({{"event", "transition"},
                          {"epoch", t.epoch},
                          {"from", to_string(t.from)},
                          {"to", to_string(t.to)},
                          {"at", t.at}});
      for (const auto& f : tick.failures) {
        events.push_back({{"event", "tick_failure"}, {"epoch", f.epoch}, {"reason", f.reason}});
        throw Error(ErrorCode::Inconsistent, fmt::format("cloud failed to process epoch {}: {}", f.epoch, f.reason));
      }

      // SP: fetch the fresh epoch and open it inside the enclave.
      if (state_at(batch.window, policy, now) == DataState::Accessible) {
        auto cts = sp_cloud.fetch_for_sp(kSpId, id, now);
        std::size_t opened = 0;
        for (const auto& ct : cts)
          if (decrypt_reading(ct, d.keys.enclave).epoch == id) ++opened;
        events.push_back({{"event", "sp_fetch"}, {"epoch", id}, {"ciphertexts", cts.size()}, {"opened", opened}});
        if (opened != batch.readings.size())
          throw Error(ErrorCode::Inconsistent, fmt::format("SP opened {} of {} readings", opened, batch.readings.size()));
      }

      // Users: queries go through the SP's logger.
      for (std::size_t q = 0; q < c.queries_per_epoch; ++q, ++query_seq) {
        const auto& user = users[query_seq % users.size()];
        auto text = fmt::format("SELECT count(*) FROM readings WHERE epoch={} AND ap='AP-{:04}'", id, query_seq % 2000);
        auto rec = make_query_record(to_bytes(text), now, user, d.keys.user_signing.at(user));
        bool accepted = user_sp.log_query(rec, now);
        events.push_back({{"event", "query"}, {"user", user}, {"at", now}, {"accepted", accepted}});
      }
      logger.poll(now);

      // Users and the SDP: verify the new epoch and every epoch that just moved.
      verify_epoch(batch, now, "ingested");
      for (const auto& t : tick.transitions) {
        const auto& b = *by_id.at(t.epoch);
        if (t.to == DataState::Irrecoverable) {
          verify_epoch(b, now, "expunged");
        } else if (t.to == DataState::Purged) {
          try {
            user_cloud.fetch_bundle(b.window.bt(), now);
            events.push_back({{"event", "fetch_purged"}, {"epoch", t.epoch}, {"served", true}});
            ++result.verification_failures;
          } catch (const Error& e) {
            events.push_back({{"event", "fetch_purged"},
                              {"epoch", t.epoch},
                              {"served", false},
                              {"error", std::string(to_string(e.code()))}});
          }
        }
      }
    }

    // SDP audit of the query log, chained from block 1.
    const Time end = c.origin + c.duration;
    if (logger.open_records() > 0 || logger.sealed_blocks().empty()) logger.seal(end);
    std::optional<AccumulatorValue> trusted;
    for (std::uint64_t i = 1;; ++i) {
      std::optional<wire::AuditResponse> got;
      try {
        got = sdp_sp.audit(i);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NotFound) break;
        throw;
      }
      auto& resp = *got;
      auto v = audit_block(resp.block, trusted, d.keys.sdp_box, d.params, d.keys.user_directory());
      const bool continuity = resp.prev_proof == trusted;
      ++result.audited_blocks;
      if (!v.ok() || !continuity) ++result.audit_failures;
      auto j = to_json(v);
      j["event"] = "audit";
      j["continuity"] = continuity;
      events.push_back(std::move(j));
      trusted = v.recomputed_proof ? v.recomputed_proof : std::optional<AccumulatorValue>(resp.block.block_proof);
    }
  } catch (const Error& e) {
    result.aborted = fmt::format("{} ({})", e.what(), to_string(e.code()));
    events.push_back({{"event", "abort"}, {"error", *result.aborted}});
  }

  auto& rep = result.report;
  rep.outsourced_bytes = store.outsourced_bytes();
  rep.add("scenario", "all", "control_digest", seconds(control_total.digest));
  rep.add("scenario", "all", "control_encrypt", seconds(control_total.encrypt));
  rep.add("scenario", "all", "control_accessible_tag", seconds(control_total.accessible_tag));
  rep.add("scenario", "all", "control_irrecoverable_tag", seconds(control_total.irrecoverable_tag));
  rep.add("scenario", "all", "ingest", seconds(ingest_time));
  rep.add("scenario", "all", "tick", seconds(tick_time));
  rep.add("scenario", "all", "verify", seconds(verify_time), result.verifications);
  if (transfers > 0) rep.add("scenario", "all", "bundle_transfer_mean", seconds(transfer_time) / transfers, transfers);
  return result;
}

}  // namespace expunge
