#include "expunge/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace expunge {

using nlohmann::json;

RateProfile RateProfile::flat(double rate) {
  RateProfile p;
  p.per_hour.fill(rate);
  return p;
}

RateProfile RateProfile::day_night(double day, double night, int day_start, int day_end) {
  RateProfile p;
  for (int h = 0; h < 24; ++h) p.per_hour[h] = (h >= day_start && h < day_end) ? day : night;
  return p;
}

double RateProfile::daily_total() const noexcept { return std::accumulate(per_hour.begin(), per_hour.end(), 0.0); }

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::Domain, m); };
  if (delta == 0) fail("delta must be positive");
  (void)policy();
  for (double r : rates.per_hour)
    if (!(r >= 0)) fail("reading rates must be non-negative");
  if (population == 0) fail("population must be positive");
  if (modulus_bits < 512 || modulus_bits % 2 != 0) fail("modulus_bits must be even and at least 512");
  if (payload_bytes > kDefaultMaxPayload) fail("payload_bytes exceeds the reading payload limit");
  if (block_capacity == 0) fail("block_capacity must be positive");
  if (block_max_age == 0) fail("block_max_age must be positive");
}

void ScenarioConfig::validate_for_scenario() const {
  validate();
  const std::uint64_t needed = (p_ver ? *p_ver : p_del) + 1;
  if (duration / delta < needed)
    throw Error(ErrorCode::Domain,
                fmt::format("duration covers {} epochs; at least {} are needed to reach every state", duration / delta,
                            needed));
  if (users == 0) throw Error(ErrorCode::Domain, "at least one user is needed");
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  try {
    auto j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::Domain, "config must be a JSON object");
    static const std::array known{"origin_ms",      "delta_ms",       "p_del",          "p_ver",
                                  "rates_per_hour", "day_rate",       "night_rate",     "day_start_hour",
                                  "day_end_hour",   "population",     "duration_ms",    "modulus_bits",
                                  "hash",           "payload_bytes",  "arrival",        "seed",
                                  "transport",      "lazy_cloud",     "tampering_sp",   "users",
                                  "queries_per_epoch", "block_capacity", "block_max_age_ms", "workdir"};
    for (const auto& [k, v] : j.items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw Error(ErrorCode::Domain, fmt::format("unknown config key '{}'", k));

    read_opt(j, "origin_ms", c.origin);
    read_opt(j, "delta_ms", c.delta);
    read_opt(j, "p_del", c.p_del);
    if (j.contains("p_ver")) {
      if (j["p_ver"].is_null()) c.p_ver.reset();
      else c.p_ver = j["p_ver"].get<std::uint32_t>();
    }
    if (j.contains("rates_per_hour")) {
      auto v = j["rates_per_hour"].get<std::vector<double>>();
      if (v.size() != 24) throw Error(ErrorCode::Domain, "rates_per_hour needs 24 entries");
      std::copy(v.begin(), v.end(), c.rates.per_hour.begin());
    } else if (j.contains("day_rate") || j.contains("night_rate")) {
      double day = j.value("day_rate", 0.0);
      double night = j.value("night_rate", day);
      c.rates = RateProfile::day_night(day, night, j.value("day_start_hour", 7), j.value("day_end_hour", 22));
    }
    read_opt(j, "population", c.population);
    read_opt(j, "duration_ms", c.duration);
    read_opt(j, "modulus_bits", c.modulus_bits);
    if (j.contains("hash")) {
      auto h = parse_hash_algorithm(j["hash"].get<std::string>());
      if (!h) throw Error(ErrorCode::Domain, "hash must be 'sha256' or 'sha3-256'");
      c.hash = *h;
    }
    read_opt(j, "payload_bytes", c.payload_bytes);
    if (j.contains("arrival")) {
      auto a = j["arrival"].get<std::string>();
      if (a == "poisson") c.arrival = ArrivalMode::Poisson;
      else if (a == "uniform") c.arrival = ArrivalMode::Uniform;
      else throw Error(ErrorCode::Domain, "arrival must be 'poisson' or 'uniform'");
    }
    read_opt(j, "seed", c.seed);
    if (j.contains("transport")) {
      auto t = j["transport"].get<std::string>();
      if (t == "loopback") c.transport = TransportKind::Loopback;
      else if (t == "tcp") c.transport = TransportKind::Tcp;
      else throw Error(ErrorCode::Domain, "transport must be 'loopback' or 'tcp'");
    }
    read_opt(j, "lazy_cloud", c.lazy_cloud);
    read_opt(j, "tampering_sp", c.tampering_sp);
    read_opt(j, "users", c.users);
    read_opt(j, "queries_per_epoch", c.queries_per_epoch);
    read_opt(j, "block_capacity", c.block_capacity);
    read_opt(j, "block_max_age_ms", c.block_max_age);
    if (j.contains("workdir")) c.workdir = j["workdir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Domain, fmt::format("bad config: {}", e.what()));
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot read config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ScenarioConfig& c) {
  json j;
  j["origin_ms"] = c.origin;
  j["delta_ms"] = c.delta;
  j["p_del"] = c.p_del;
  j["p_ver"] = c.p_ver ? json(*c.p_ver) : json(nullptr);
  j["rates_per_hour"] = std::vector<double>(c.rates.per_hour.begin(), c.rates.per_hour.end());
  j["population"] = c.population;
  j["duration_ms"] = c.duration;
  j["modulus_bits"] = c.modulus_bits;
  j["hash"] = std::string(to_string(c.hash));
  j["payload_bytes"] = c.payload_bytes;
  j["arrival"] = c.arrival == ArrivalMode::Poisson ? "poisson" : "uniform";
  j["seed"] = c.seed;
  j["transport"] = c.transport == TransportKind::Loopback ? "loopback" : "tcp";
  j["lazy_cloud"] = c.lazy_cloud;
  j["tampering_sp"] = c.tampering_sp;
  j["users"] = c.users;
  j["queries_per_epoch"] = c.queries_per_epoch;
  j["block_capacity"] = c.block_capacity;
  j["block_max_age_ms"] = c.block_max_age;
  if (c.workdir) j["workdir"] = c.workdir->string();
  return j.dump(2);
}

}  // namespace expunge
