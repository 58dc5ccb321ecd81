#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "expunge/attestation.hpp"
#include "expunge/bench.hpp"
#include "expunge/cloud_store.hpp"
#include "expunge/config.hpp"
#include "expunge/keys.hpp"
#include "expunge/query_log.hpp"
#include "json.hpp"

namespace expunge {

/// Keys, accumulator parameters and configuration of one simulated
/// deployment. Saved to a directory so later CLI invocations can act on the
/// same cloud store and query log.
struct Deployment {
  ScenarioConfig config;
  KeyRing keys;
  AccumulatorParams params;

  static Deployment create(const ScenarioConfig& config);
  /// Writes config.json, keys.bin and params.bin into config.workdir.
  void save() const;
  static Deployment load(const std::filesystem::path& dir);

  CloudConfig cloud_config() const;
  QueryLoggerConfig logger_config() const;
  std::vector<std::string> user_ids() const;
  /// Cell size the verifier assumes for a reading of the configured shape.
  std::size_t expected_cell_size() const;
};

inline constexpr const char* kSpId = "sp-1";

struct ScenarioResult {
  /// Ordered protocol events with verdicts. Everything timing-dependent sits
  /// under a "timing" key so transcripts can be compared across runs.
  nlohmann::json transcript = nlohmann::json::array();
  BenchmarkReport report;
  std::size_t verifications = 0;
  std::size_t verification_failures = 0;
  std::size_t time_bound_violations = 0;
  std::size_t audited_blocks = 0;
  std::size_t audit_failures = 0;
  /// Set when a role failed and the run stopped early.
  std::optional<std::string> aborted;

  bool ok() const noexcept { return !aborted && verification_failures == 0 && audit_failures == 0; }
};

/// Drives all roles over the configured transport on a virtual clock:
/// control phase, ingest, SP fetches, ticks, user and SDP verifications,
/// query logging and the final SDP audit.
ScenarioResult run_scenario(const ScenarioConfig& config);
ScenarioResult run_scenario(Deployment& deployment);

/// Machine-readable verdicts. Timing-dependent fields go under "timing".
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const AuditVerdict& v);

/// Copy of a transcript with every "timing" member removed.
nlohmann::json strip_timing(const nlohmann::json& transcript);

}  // namespace expunge
