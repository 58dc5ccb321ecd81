// expunge-sim: drives the simulated deployment from the command line.
//
// Exit codes: 0 success / verified, 1 verification or audit failure,
// 2 protocol error, 3 usage or configuration error.

#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "expunge/generator.hpp"
#include "expunge/scenario.hpp"
#include "expunge/services.hpp"

using namespace expunge;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitProtocol = 2;
constexpr int kExitUsage = 3;

ScenarioConfig config_or_default(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : load_config(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path));
  out << text << '\n';
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_path) {
  auto cfg = config_or_default(config_path);
  auto readings = generate_readings(cfg, seed.value_or(cfg.seed));
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error(ErrorCode::Io, fmt::format("cannot write {}", out_path));
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  for (const auto& r : readings)
    out << json{{"time", r.time},
                {"device", std::string(r.device_id.begin(), r.device_id.end())},
                {"payload", std::string(r.payload.begin(), r.payload.end())}}
               .dump()
        << '\n';
  std::cerr << fmt::format("{} readings over {} ms\n", readings.size(), cfg.duration);
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& dir) {
  auto cfg = config_or_default(config_path);
  if (!dir.empty()) cfg.workdir = dir;
  auto result = run_scenario(cfg);
  if (cfg.workdir) {
    write_text((*cfg.workdir / "transcript.json").string(), result.transcript.dump(2));
    write_text((*cfg.workdir / "report.json").string(), result.report.to_json().dump(2));
  }
  std::cout << result.report.to_table();
  std::cout << fmt::format("verifications: {} ({} failed, {} over the time bound); audited blocks: {} ({} failed)\n",
                           result.verifications, result.verification_failures, result.time_bound_violations,
                           result.audited_blocks, result.audit_failures);
  if (result.aborted) {
    std::cout << "aborted: " << *result.aborted << '\n';
    return kExitProtocol;
  }
  return result.ok() ? kExitOk : kExitFailed;
}

int cmd_bench(const std::string& config_path, int exp, const std::string& json_path) {
  auto cfg = config_or_default(config_path);
  auto rep = bench(cfg, exp);
  std::cout << rep.to_table();
  if (!json_path.empty()) write_text(json_path, rep.to_json().dump(2));
  return kExitOk;
}

// Serves the saved cloud over the chosen transport for one request batch.
struct LocalCloud {
  Deployment deployment;
  CloudStore store;
  CloudService service;
  std::unique_ptr<TcpServer> server;
  std::unique_ptr<Channel> channel;

  LocalCloud(const std::string& dir, bool tcp)
      : deployment(Deployment::load(dir)), store(deployment.cloud_config()), service(store) {
    if (tcp) {
      server = std::make_unique<TcpServer>(service.handler());
      channel = std::make_unique<TcpChannel>(server->port());
    } else {
      channel = std::make_unique<LoopbackChannel>(service.handler());
    }
  }
};

int cmd_verify(const std::string& dir, Time t, const std::string& role, std::string device,
               std::optional<Time> now_opt, bool tcp) {
  LocalCloud cloud(dir, tcp);
  auto& d = cloud.deployment;
  CloudClient client(*cloud.channel, d.params);
  const Time now = now_opt.value_or(cloud.store.last_tick());
  const auto rtt = client.round_trip(9);
  auto tb = client.fetch_bundle(t, now);
  const auto bound =
      calibrate_time_bound(rtt, tb.bundle.digests.size(), d.expected_cell_size());
  const auto policy = d.config.policy();
  VerifyContext ctx{d.params, d.keys.shared_key, policy, t, tb.transport, bound, now};
  VerificationReport rep;
  if (role == "user") {
    if (device.empty()) device = device_pool(d.config.population, d.config.seed).front();
    rep = verify_as_user(as_bytes(device), tb.bundle, ctx);
  } else {
    rep = verify_as_sdp(tb.bundle, ctx);
  }
  auto j = to_json(rep);
  j["role"] = role;
  j["requested_time"] = t;
  j["now"] = now;
  std::cout << j.dump(2) << '\n';
  std::cout << fmt::format("epoch {} ({}): {}\n", rep.epoch_id, to_string(rep.state_claimed),
                           rep.verified() ? "VERIFIED" : "NOT VERIFIED");
  return rep.verified() ? kExitOk : kExitFailed;
}

int cmd_tick(const std::string& dir, Time now) {
  LocalCloud cloud(dir, false);
  CloudClient client(*cloud.channel, cloud.deployment.params);
  auto rep = client.tick(now);
  json j = json::array();
  for (const auto& t : rep.transitions)
    j.push_back({{"epoch", t.epoch}, {"from", to_string(t.from)}, {"to", to_string(t.to)}, {"at", t.at}});
  std::cout << j.dump(2) << '\n';
  for (const auto& f : rep.failures) std::cerr << fmt::format("epoch {} failed: {}\n", f.epoch, f.reason);
  return rep.failures.empty() ? kExitOk : kExitProtocol;
}

int cmd_audit(const std::string& dir, std::uint64_t block_id) {
  auto d = Deployment::load(dir);
  QueryLogger logger(d.logger_config(), d.params, d.keys.sdp_box.public_key, d.keys.user_directory(), 0);
  SpService service(logger, d.params, d.config.tampering_sp);
  LoopbackChannel channel(service.handler());
  SpClient client(channel, d.params);
  // The previous proof the SDP trusts comes from auditing the chain from block 1.
  std::optional<AccumulatorValue> trusted;
  AuditVerdict verdict;
  bool continuity = true;
  for (std::uint64_t i = 1; i <= block_id; ++i) {
    auto resp = client.audit(i);
    verdict = audit_block(resp.block, trusted, d.keys.sdp_box, d.params, d.keys.user_directory());
    continuity = continuity && resp.prev_proof == trusted;
    trusted = verdict.recomputed_proof ? verdict.recomputed_proof
                                       : std::optional<AccumulatorValue>(resp.block.block_proof);
  }
  auto j = to_json(verdict);
  j["continuity"] = continuity;
  std::cout << j.dump(2) << '\n';
  const bool ok = verdict.ok() && continuity;
  std::cout << fmt::format("block {}: {}\n", block_id, ok ? "OK" : "TAMPERED");
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated IoT data deployment with verifiable deletion"};
  app.require_subcommand(1);

  std::string config_path, dir, out_path, json_path, role = "user", device;
  std::optional<std::uint64_t> seed;
  std::optional<Time> now_opt;
  Time t = 0, now = 0;
  int exp = 1;
  std::uint64_t block_id = 1;
  bool tcp = false;

  auto* gen = app.add_subcommand("generate", "Print the synthetic reading stream as JSON lines");
  gen->add_option("--config", config_path, "Scenario config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Override the config seed");
  gen->add_option("--out", out_path, "Write to a file instead of stdout");

  auto* run = app.add_subcommand("run", "Replay a scenario with every role");
  run->add_option("--config", config_path, "Scenario config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--dir", dir, "Deployment directory to create (keys, cloud, query log, transcript)");

  auto* bench_cmd = app.add_subcommand("bench", "Run one benchmark experiment");
  bench_cmd->add_option("--exp", exp, "Experiment 1..5")->required()->check(CLI::Range(1, 5));
  bench_cmd->add_option("--config", config_path, "Base config (JSON)")->check(CLI::ExistingFile);
  bench_cmd->add_option("--json", json_path, "Also write the report as JSON");

  auto* verify = app.add_subcommand("verify", "Verify the epoch containing a time against a saved deployment");
  verify->add_option("--dir", dir, "Deployment directory")->required()->check(CLI::ExistingDirectory);
  verify->add_option("--time", t, "Time inside the epoch to verify (ms)")->required();
  verify->add_option("--role", role, "user or sdp")->check(CLI::IsMember({"user", "sdp"}));
  verify->add_option("--device", device, "Device id for the membership check (user role)");
  verify->add_option("--now", now_opt, "Virtual time of the request; defaults to the last tick");
  verify->add_flag("--tcp", tcp, "Fetch over a loopback TCP socket instead of in-process");

  auto* audit = app.add_subcommand("audit", "SDP audit of a sealed query-log block");
  audit->add_option("--dir", dir, "Deployment directory")->required()->check(CLI::ExistingDirectory);
  audit->add_option("--block", block_id, "Block id (from 1)")->required()->check(CLI::PositiveNumber);

  auto* tick = app.add_subcommand("tick", "Advance the cloud's clock and apply the retention policy (test mode)");
  tick->add_option("--dir", dir, "Deployment directory")->required()->check(CLI::ExistingDirectory);
  tick->add_option("--now", now, "New virtual time (ms)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(config_path, seed, out_path);
    if (*run) return cmd_run(config_path, dir);
    if (*bench_cmd) return cmd_bench(config_path, exp, json_path);
    if (*verify) return cmd_verify(dir, t, role, device, now_opt, tcp);
    if (*audit) return cmd_audit(dir, block_id);
    if (*tick) return cmd_tick(dir, now);
  } catch (const Error& e) {
    std::cerr << fmt::format("error ({}): {}\n", to_string(e.code()), e.what());
    return e.code() == ErrorCode::Domain || e.code() == ErrorCode::Io ? kExitUsage : kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitProtocol;
  }
  return kExitUsage;
}
