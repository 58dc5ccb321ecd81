#pragma once

#include <string>
#include <vector>

#include "expunge/config.hpp"

namespace expunge {

/// Synthetic locally administered MAC addresses ("02:..."), 17 bytes each.
std::vector<std::string> device_pool(std::size_t population, std::uint64_t seed);

/// An association-trap-like record naming the access point, padded or cut to
/// exactly `size` bytes.
Bytes synthetic_payload(std::uint32_t access_point, std::uint64_t sequence, std::size_t size);

/// Time-ordered readings over [origin, origin + duration) following the
/// configured hourly profile. The same config and seed give the same stream.
std::vector<SensorReading> generate_readings(const ScenarioConfig& config, std::uint64_t seed);

/// Readings grouped per epoch, including empty epochs, covering the whole
/// simulated duration.
struct EpochBatch {
  EpochWindow window;
  std::vector<SensorReading> readings;
};
std::vector<EpochBatch> split_into_epochs(const ScenarioConfig& config, std::vector<SensorReading> readings);

}  // namespace expunge
