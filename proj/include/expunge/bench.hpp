#pragma once

#include <map>
#include <string>
#include <vector>

#include "expunge/config.hpp"
#include "json.hpp"

namespace expunge {

struct TimingRow {
  std::string experiment;  // "exp1" .. "exp5", or "scenario"
  std::string label;       // e.g. the epoch duration
  std::string metric;      // what was timed
  double seconds = 0;
  std::size_t items = 0;   // readings, cells or bytes behind the number
};

struct BenchmarkReport {
  std::map<std::string, std::string> metadata;
  std::vector<TimingRow> timings;
  std::size_t raw_bytes = 0;
  std::size_t outsourced_bytes = 0;

  double storage_ratio() const noexcept;
  void add(std::string experiment, std::string label, std::string metric, double seconds, std::size_t items = 0);
  /// First row matching all three keys; throws Error(NotFound) otherwise.
  const TimingRow& find(std::string_view experiment, std::string_view label, std::string_view metric) const;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Host and parameter details stamped on every report.
std::map<std::string, std::string> run_metadata(const ScenarioConfig& config);

/// Epoch durations used by the trend experiments.
inline constexpr Time kBenchDeltas[] = {15 * kMinute, kHour, kDay};
std::string delta_label(Time delta);

/// Exp 1: control-phase time per epoch and per simulated day across the
/// three epoch durations. Also times one cloud-side expunge per duration.
BenchmarkReport bench_control_phase(const ScenarioConfig& base);
/// Exp 2: outsourced bytes against raw bytes for `readings` readings.
BenchmarkReport bench_storage(const ScenarioConfig& base, std::size_t readings = 100000);
/// Exp 3: wall time to verify every epoch of one simulated day.
BenchmarkReport bench_verification(const ScenarioConfig& base);
/// Exp 4: cloud expunge time per epoch size.
BenchmarkReport bench_expunge(const ScenarioConfig& base);
/// Exp 5: bundle size, measured loopback transfer time and modelled time at
/// fixed link throughputs.
BenchmarkReport bench_transfer(const ScenarioConfig& base);

/// Dispatches 1..5; throws Error(Domain) for anything else.
BenchmarkReport bench(const ScenarioConfig& base, int experiment);

}  // namespace expunge
