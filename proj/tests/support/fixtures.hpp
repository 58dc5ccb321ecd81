#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "expunge/attestation.hpp"
#include "expunge/cloud_store.hpp"
#include "expunge/control_phase.hpp"
#include "expunge/keys.hpp"

namespace expunge::testing {

/// eta = 61 * 53 = 3233, x = 2.
const AccumulatorParams& toy_params();
/// Generated once per process.
const AccumulatorParams& params512();
const AccumulatorParams& params2048();

Digest digest_from_hex(std::string_view hex);
std::string mac(unsigned i);
SensorReading make_reading(const std::string& device, Time t, std::size_t payload_size = 32);

/// Removes itself on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// SDP plus an in-memory cloud wired together directly.
struct Protocol {
  explicit Protocol(const AccumulatorParams& params, std::uint32_t p_del = 2, std::optional<std::uint32_t> p_ver = 4,
                    Time delta = 1000, bool lazy = false);

  KeyRing keys;
  AccumulatorParams params;
  RetentionPolicy policy;
  CloudStore store;
  ControlPhase control;

  /// Runs the control phase for one epoch and ingests the result.
  OutsourcePayload outsource(const EpochWindow& w, const std::vector<SensorReading>& readings);
  VerifyContext context(Time requested, Time now) const;
};

}  // namespace expunge::testing
