#include "expunge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "expunge/attestation.hpp"
#include "expunge/cloud_store.hpp"
#include "expunge/control_phase.hpp"
#include "expunge/generator.hpp"
#include "expunge/services.hpp"

namespace expunge {

using Clock = std::chrono::steady_clock;

namespace {

double seconds(std::chrono::nanoseconds d) { return std::chrono::duration<double>(d).count(); }

template <typename F>
double best_of(int runs, F&& f) {
  auto best = std::chrono::nanoseconds::max();
  for (int i = 0; i < runs; ++i) {
    auto start = Clock::now();
    f();
    best = std::min(best, std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start));
  }
  return seconds(best);
}

struct Fixture {
  KeyRing keys;
  AccumulatorParams params;

  explicit Fixture(const ScenarioConfig& c) : keys(KeyRing::generate()), params(AccumulatorParams::setup(c.modulus_bits)) {
    set_hash_algorithm(c.hash);
  }
  ControlKeys control_keys() const { return ControlKeys{keys.enclave.public_key, keys.shared_key}; }
};

ScenarioConfig one_day(const ScenarioConfig& base, Time delta) {
  ScenarioConfig c = base;
  c.origin = 0;
  c.delta = delta;
  c.duration = kDay;
  return c;
}

// Runs the control phase for every epoch and feeds the payloads to `sink`.
template <typename Sink>
ControlTimings run_control(const std::vector<EpochBatch>& batches, const Fixture& fx, Sink&& sink) {
  ControlPhase control(fx.params, fx.control_keys());
  ControlTimings total;
  for (const auto& b : batches) {
    ControlTimings tm;
    auto payload = control.process(b.window, b.readings, &tm);
    total += tm;
    sink(b, std::move(payload));
  }
  return total;
}

}  // namespace

double BenchmarkReport::storage_ratio() const noexcept {
  return raw_bytes == 0 ? 0.0 : static_cast<double>(outsourced_bytes) / static_cast<double>(raw_bytes);
}

void BenchmarkReport::add(std::string experiment, std::string label, std::string metric, double secs,
                          std::size_t items) {
  timings.push_back(TimingRow{std::move(experiment), std::move(label), std::move(metric), secs, items});
}

const TimingRow& BenchmarkReport::find(std::string_view experiment, std::string_view label,
                                       std::string_view metric) const {
  for (const auto& r : timings)
    if (r.experiment == experiment && r.label == label && r.metric == metric) return r;
  throw Error(ErrorCode::NotFound, fmt::format("no timing {}/{}/{}", experiment, label, metric));
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json j;
  j["metadata"] = metadata;
  j["timings"] = nlohmann::json::array();
  for (const auto& r : timings)
    j["timings"].push_back(
        {{"experiment", r.experiment}, {"label", r.label}, {"metric", r.metric}, {"seconds", r.seconds}, {"items", r.items}});
  if (raw_bytes > 0) {
    j["storage"] = {{"raw_bytes", raw_bytes}, {"outsourced_bytes", outsourced_bytes}, {"ratio", storage_ratio()}};
  }
  return j;
}

std::string BenchmarkReport::to_table() const {
  std::string out = fmt::format("{:<10} {:<22} {:<28} {:>14} {:>10}\n", "exp", "label", "metric", "seconds", "items");
  out += std::string(88, '-') + "\n";
  for (const auto& r : timings)
    out += fmt::format("{:<10} {:<22} {:<28} {:>14.6f} {:>10}\n", r.experiment, r.label, r.metric, r.seconds, r.items);
  if (raw_bytes > 0)
    out += fmt::format("storage: raw {} B, outsourced {} B, ratio {:.3f}\n", raw_bytes, outsourced_bytes,
                       storage_ratio());
  return out;
}

std::map<std::string, std::string> run_metadata(const ScenarioConfig& c) {
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"started_at", stamp},
          {"hash", std::string(to_string(c.hash))},
          {"modulus_bits", std::to_string(c.modulus_bits)},
          {"payload_bytes", std::to_string(c.payload_bytes)},
          {"arrival", c.arrival == ArrivalMode::Poisson ? "poisson" : "uniform"},
          {"seed", std::to_string(c.seed)},
          {"hardware_threads", std::to_string(std::thread::hardware_concurrency())},
          {"compiler", __VERSION__}};
}

std::string delta_label(Time delta) {
  if (delta % kDay == 0) return fmt::format("{}d", delta / kDay);
  if (delta % kHour == 0) return fmt::format("{}h", delta / kHour);
  if (delta % kMinute == 0) return fmt::format("{}min", delta / kMinute);
  return fmt::format("{}ms", delta);
}

BenchmarkReport bench_control_phase(const ScenarioConfig& base) {
  BenchmarkReport rep;
  rep.metadata = run_metadata(base);
  Fixture fx(base);
  for (Time delta : kBenchDeltas) {
    auto cfg = one_day(base, delta);
    auto batches = split_into_epochs(cfg, generate_readings(cfg, cfg.seed));
    std::size_t readings = 0;
    std::vector<std::pair<EpochId, std::vector<Bytes>>> cts;
    auto total = run_control(batches, fx, [&](const EpochBatch& b, OutsourcePayload p) {
      readings += b.readings.size();
      cts.emplace_back(b.window.id(), std::move(p.sensor.ciphertexts));
    });
    const auto label = delta_label(delta);
    const auto epochs = batches.size();
    // Tags are recomputed a few times so the per-day figure is not one noisy sample.
    const double tags = best_of(3, [&] {
      for (const auto& [id, c] : cts) {
        (void)accessible_tag(c);
        (void)irrecoverable_tag(c, id);
      }
    });
    rep.add("exp1", label, "control_per_epoch", seconds(total.total()) / static_cast<double>(epochs), readings / epochs);
    rep.add("exp1", label, "control_per_day", seconds(total.total()), readings);
    rep.add("exp1", label, "encrypt_per_day", seconds(total.encrypt), readings);
    rep.add("exp1", label, "tag_per_day", tags, readings);
  }
  return rep;
}

BenchmarkReport bench_storage(const ScenarioConfig& base, std::size_t readings) {
  BenchmarkReport rep;
  rep.metadata = run_metadata(base);
  Fixture fx(base);
  constexpr double kRate = 2000;  // readings per hour, evenly spaced
  ScenarioConfig cfg = base;
  cfg.origin = 0;
  cfg.delta = kHour;
  cfg.rates = RateProfile::flat(kRate);
  cfg.arrival = ArrivalMode::Uniform;
  cfg.duration = static_cast<Time>((readings + kRate - 1) / kRate) * kHour;
  auto all = generate_readings(cfg, cfg.seed);
  all.resize(std::min(all.size(), readings));
  for (const auto& r : all) rep.raw_bytes += encoded_size(r);
  auto batches = split_into_epochs(cfg, std::move(all));

  CloudStore store(CloudConfig{cfg.policy(), fx.params, {}, std::nullopt, false, false});
  auto total = run_control(batches, fx, [&](const EpochBatch&, OutsourcePayload p) { store.ingest(p); });
  rep.outsourced_bytes = store.outsourced_bytes();
  rep.add("exp2", "1h", "control_total", seconds(total.total()), readings);
  rep.metadata["storage_ratio"] = fmt::format("{:.4f}", rep.storage_ratio());
  return rep;
}

BenchmarkReport bench_verification(const ScenarioConfig& base) {
  BenchmarkReport rep;
  rep.metadata = run_metadata(base);
  Fixture fx(base);
  auto cfg = one_day(base, kHour);
  // The whole day must still be accessible at its end and all of it
  // irrecoverable one retention period later.
  cfg.p_del = 24;
  cfg.p_ver = std::nullopt;
  auto batches = split_into_epochs(cfg, generate_readings(cfg, cfg.seed));

  CloudStore store(CloudConfig{cfg.policy(), fx.params, {}, std::nullopt, false, false});
  CloudService service(store);
  LoopbackChannel channel(service.handler());
  CloudClient client(channel, fx.params);
  std::size_t readings = 0;
  run_control(batches, fx, [&](const EpochBatch& b, OutsourcePayload p) {
    readings += b.readings.size();
    client.ingest(p);
  });

  const auto policy = cfg.policy();
  auto verify_day = [&](Time now) {
    bool all_ok = true;
    auto start = Clock::now();
    for (const auto& b : batches) {
      auto tb = client.fetch_bundle(b.window.bt(), now);
      // Timing is not judged here; only the verification work is measured.
      VerifyContext ctx{fx.params, fx.keys.shared_key, policy, b.window.bt(), tb.transport, TimeBound{{}, false}, now};
      auto r = b.readings.empty() ? verify_as_sdp(tb.bundle, ctx)
                                  : verify_as_user(b.readings.front().device_id, tb.bundle, ctx);
      all_ok = all_ok && r.verified();
    }
    if (!all_ok) throw Error(ErrorCode::Inconsistent, "an honest epoch failed verification");
    return seconds(Clock::now() - start);
  };

  const Time day_end = cfg.origin + cfg.duration;
  const double accessible = verify_day(day_end);
  rep.add("exp3", "accessible", "verify_day", accessible, readings);
  rep.add("exp3", "accessible", "verify_year_extrapolated", accessible * 365, readings * 365);
  const Time later = day_end + cfg.delta * cfg.p_del;
  store.tick(later);
  const double irrecoverable = verify_day(later);
  rep.add("exp3", "irrecoverable", "verify_day", irrecoverable, readings);
  rep.add("exp3", "irrecoverable", "verify_year_extrapolated", irrecoverable * 365, readings * 365);
  return rep;
}

BenchmarkReport bench_expunge(const ScenarioConfig& base) {
  BenchmarkReport rep;
  rep.metadata = run_metadata(base);
  set_hash_algorithm(base.hash);
  std::mt19937_64 rng(base.seed);
  auto random_cts = [&](std::size_t n, std::size_t size) {
    std::vector<Bytes> cts(n, Bytes(size));
    for (auto& c : cts)
      for (auto& byte : c) byte = static_cast<std::uint8_t>(rng());
    return cts;
  };
  const std::size_t ct_size = reading_ciphertext_size(kMaxDeviceIdSize, base.payload_bytes);
  const double hourly = base.rates.daily_total() / 24.0;
  for (Time delta : kBenchDeltas) {
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(hourly * static_cast<double>(delta) / kHour));
    auto cts = random_cts(n, ct_size);
    auto cells = CellArray::from_ciphertexts(cts, 0);
    const double t = best_of(3, [&] { (void)expunge(cells, 0, 0); });
    rep.add("exp4", delta_label(delta), "expunge_per_epoch", t, n);
  }
  for (std::size_t n = 1024; n <= 32768; n *= 2) {
    auto cells = CellArray::from_ciphertexts(random_cts(n, 1020), 0);
    const double t = best_of(1, [&] { (void)expunge(cells, 0, 0); });
    rep.add("exp4", fmt::format("{}x1KiB", n), "expunge_cells", t, n);
  }
  return rep;
}

BenchmarkReport bench_transfer(const ScenarioConfig& base) {
  BenchmarkReport rep;
  rep.metadata = run_metadata(base);
  Fixture fx(base);
  ScenarioConfig cfg = base;
  cfg.origin = 0;
  cfg.delta = kHour;
  cfg.duration = kHour;
  auto batches = split_into_epochs(cfg, generate_readings(cfg, cfg.seed));

  CloudStore store(CloudConfig{cfg.policy(), fx.params, {}, std::nullopt, false, false});
  CloudService service(store);
  TcpServer server(service.handler());
  TcpChannel channel(server.port());
  CloudClient client(channel, fx.params);
  run_control(batches, fx, [&](const EpochBatch&, OutsourcePayload p) { client.ingest(p); });

  constexpr std::pair<const char*, double> kLinks[] = {{"10Mbps", 10e6}, {"100Mbps", 100e6}, {"1Gbps", 1e9}};
  auto measure = [&](const char* label, Time now, bool cells) {
    std::size_t bytes = 0;
    auto best = std::chrono::nanoseconds::max();
    for (int i = 0; i < 5; ++i) {
      auto tb = client.fetch_bundle(0, now, cells);
      bytes = tb.wire_bytes;
      best = std::min(best, tb.transport);
    }
    rep.add("exp5", label, "transfer_loopback", seconds(best), bytes);
    for (const auto& [name, bps] : kLinks)
      rep.add("exp5", fmt::format("{}@{}", label, name), "transfer_model", static_cast<double>(bytes) * 8 / bps, bytes);
  };
  measure("accessible", kHour, false);
  client.tick(kHour + cfg.delta * cfg.p_del);
  measure("irrecoverable", kHour + cfg.delta * cfg.p_del, false);
  measure("irrecoverable+cells", kHour + cfg.delta * cfg.p_del, true);
  rep.add("exp5", "loopback", "round_trip", seconds(client.round_trip(9)));
  return rep;
}

BenchmarkReport bench(const ScenarioConfig& base, int experiment) {
  switch (experiment) {
    case 1: return bench_control_phase(base);
    case 2: return bench_storage(base);
    case 3: return bench_verification(base);
    case 4: return bench_expunge(base);
    case 5: return bench_transfer(base);
    default: throw Error(ErrorCode::Domain, fmt::format("no experiment {}; choose 1 to 5", experiment));
  }
}

}  // namespace expunge
