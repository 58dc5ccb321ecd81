#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include "expunge/core_model.hpp"
#include "expunge/hash.hpp"

namespace expunge {

inline constexpr Time kMinute = 60 * 1000;
inline constexpr Time kHour = 60 * kMinute;
inline constexpr Time kDay = 24 * kHour;

enum class ArrivalMode { Poisson, Uniform };
enum class TransportKind { Loopback, Tcp };

/// Expected readings per hour for each hour of the day (0 = midnight).
struct RateProfile {
  std::array<double, 24> per_hour{};

  static RateProfile flat(double rate);
  /// `day` between day_start and day_end (exclusive), `night` otherwise.
  static RateProfile day_night(double day, double night, int day_start = 7, int day_end = 22);
  double daily_total() const noexcept;
};

struct ScenarioConfig {
  Time origin = 0;
  Time delta = kHour;
  std::uint32_t p_del = 2;
  std::optional<std::uint32_t> p_ver = 4;  // nullopt: never purged
  RateProfile rates = RateProfile::day_night(2400, 600);
  std::size_t population = 500;
  Time duration = 6 * kHour;
  int modulus_bits = 2048;
  HashAlgorithm hash = HashAlgorithm::Sha256;
  std::size_t payload_bytes = 256;
  ArrivalMode arrival = ArrivalMode::Poisson;
  std::uint64_t seed = 1;
  TransportKind transport = TransportKind::Loopback;
  bool lazy_cloud = false;
  bool tampering_sp = false;
  std::size_t users = 2;
  std::size_t queries_per_epoch = 3;
  std::size_t block_capacity = 8;
  Time block_max_age = kHour;
  /// Where the cloud and query log keep their files; in memory when empty.
  std::optional<std::filesystem::path> workdir;

  RetentionPolicy policy() const { return RetentionPolicy(p_del, p_ver, delta); }
  /// Throws Error(Domain) on an unusable configuration.
  void validate() const;
  /// validate() plus enough simulated time to reach every state.
  void validate_for_scenario() const;
};

/// Configuration files are JSON; see docs/config.md for the keys.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string to_json(const ScenarioConfig& c);

}  // namespace expunge
