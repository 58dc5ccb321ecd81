#include "expunge/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace expunge {

namespace {

constexpr std::uint32_t kAccessPoints = 2000;

const char* const kEvents[] = {"assoc", "reassoc", "disassoc", "roam"};

}  // namespace

std::vector<std::string> device_pool(std::size_t population, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::string> out;
  out.reserve(population);
  std::uniform_int_distribution<std::uint32_t> byte(0, 255);
  while (out.size() < population) {
    auto mac = fmt::format("02:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", byte(rng), byte(rng), byte(rng), byte(rng),
                           byte(rng));
    if (std::find(out.begin(), out.end(), mac) == out.end()) out.push_back(std::move(mac));
  }
  return out;
}

Bytes synthetic_payload(std::uint32_t access_point, std::uint64_t sequence, std::size_t size) {
  auto text = fmt::format("trap=wlanClient;event={};ap=AP-{:04};ctrl=wlc{};ssid=campus;seq={};", kEvents[sequence % 4],
                          access_point, access_point % 4 + 1, sequence);
  Bytes out(size);
  for (std::size_t i = 0; i < size; ++i)
    out[i] = i < text.size() ? static_cast<std::uint8_t>(text[i]) : static_cast<std::uint8_t>('a' + (i + sequence) % 26);
  return out;
}

std::vector<SensorReading> generate_readings(const ScenarioConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto devices = device_pool(c.population, seed);
  std::uniform_int_distribution<std::size_t> pick_device(0, devices.size() - 1);
  std::uniform_int_distribution<std::uint32_t> pick_ap(1, kAccessPoints);

  std::vector<SensorReading> out;
  const Time end = c.origin + c.duration;
  double carry = 0;
  std::uint64_t sequence = 0;
  for (Time a = c.origin; a < end;) {
    const Time b = std::min(end, (a / kHour + 1) * kHour);
    const double rate = c.rates.per_hour[(a / kHour) % 24];
    const double mean = rate * static_cast<double>(b - a) / static_cast<double>(kHour);
    std::vector<Time> times;
    if (c.arrival == ArrivalMode::Poisson) {
      std::uint64_t count = mean > 0 ? std::poisson_distribution<std::uint64_t>(mean)(rng) : 0;
      std::uniform_int_distribution<Time> at(a, b - 1);
      for (std::uint64_t i = 0; i < count; ++i) times.push_back(at(rng));
      std::sort(times.begin(), times.end());
    } else {
      const double want = mean + carry;
      const auto count = static_cast<std::uint64_t>(std::floor(want + 1e-9));
      carry = want - static_cast<double>(count);
      for (std::uint64_t i = 0; i < count; ++i) times.push_back(a + (b - a) * i / count);
    }
    for (Time t : times) {
      const auto& dev = devices[pick_device(rng)];
      out.push_back(SensorReading{Bytes(dev.begin(), dev.end()), t, synthetic_payload(pick_ap(rng), sequence++, c.payload_bytes)});
    }
    a = b;
  }
  return out;
}

std::vector<EpochBatch> split_into_epochs(const ScenarioConfig& c, std::vector<SensorReading> readings) {
  std::vector<EpochBatch> out;
  std::size_t next = 0;
  for (EpochWindow w(c.origin, c.delta); w.bt() < c.origin + c.duration; w = w.next()) {
    EpochBatch batch{w, {}};
    while (next < readings.size() && w.contains(readings[next].time)) batch.readings.push_back(std::move(readings[next++]));
    out.push_back(std::move(batch));
  }
  if (next != readings.size()) throw Error(ErrorCode::Inconsistent, "readings fall outside the simulated duration");
  return out;
}

}  // namespace expunge
