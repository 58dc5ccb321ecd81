#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expunge/bundle.hpp"
#include "expunge/keys.hpp"

namespace expunge {

/// Positions y (1-based) with Hash(device, T_j, y) == h^y_j. Empty means absent.
std::vector<std::uint64_t> verify_membership(ByteView device_id, const AttestationBundle& bundle);

struct CompletenessResult {
  bool ok = false;
  std::optional<AccumulatorValue> alpha;
};

/// Recomputes alpha from the digests as received, starting at x for the first
/// epoch and at CT_{j-1} otherwise, and compares it with CT_j.
CompletenessResult verify_completeness(const AttestationBundle& bundle, const AccumulatorParams& params);

struct AccessibleResult {
  bool hash_ok = false;    // uH == aH
  bool policy_ok = false;  // policy expects Accessible at served_at
  Digest user_hash{};

  bool ok() const noexcept { return hash_ok && policy_ok; }
};

/// Throws Error(Crypto) when E(aH) fails authenticated decryption.
AccessibleResult verify_accessible(const AttestationBundle& bundle, const SymmetricKey& key,
                                   const RetentionPolicy& policy);

enum class TimeBoundOutcome { Ok, Violated, NotApplicable };
std::string_view to_string(TimeBoundOutcome t) noexcept;

/// Threshold for the time-bounded deletion check.
struct TimeBound {
  std::chrono::nanoseconds tau{0};
  bool applicable = true;
};

/// tau = max(2 * round_trip, estimate / 10) with estimate the host-calibrated
/// expunge time for the epoch; not applicable when estimate < 4 * round_trip.
TimeBound calibrate_time_bound(std::chrono::nanoseconds round_trip, std::size_t cell_count, std::size_t cell_size);

struct VerificationReport {
  EpochId epoch_id = 0;
  bool request_ok = false;  // window matches the request, the policy's epoch duration and the verifier's clock
  bool membership_checked = false;
  std::vector<std::uint64_t> membership_positions;
  bool completeness_ok = false;
  std::optional<AccumulatorValue> recomputed_alpha;
  DataState state_claimed = DataState::Accessible;
  DataState state_expected = DataState::Accessible;
  bool tag_ok = false;
  bool policy_ok = false;
  bool state_ok = false;
  std::optional<Digest> recomputed_user_hash;  // accessible path
  std::optional<bool> proof_matches;           // irrecoverable path
  std::chrono::nanoseconds response_time{0};
  std::chrono::nanoseconds time_bound_limit{0};
  TimeBoundOutcome time_bound = TimeBoundOutcome::NotApplicable;
  std::string error;  // integrity/protocol failure, if any

  bool verified() const noexcept {
    return error.empty() && request_ok && completeness_ok && state_ok && time_bound != TimeBoundOutcome::Violated;
  }
};

/// Irrecoverable path. Throws Error(Protocol) when the bundle has no proof and
/// Error(Crypto) when E(irH) fails to decrypt.
VerificationReport verify_irrecoverable(const AttestationBundle& bundle, const SymmetricKey& key,
                                        const RetentionPolicy& policy, std::chrono::nanoseconds response_time,
                                        const TimeBound& bound);

struct VerifyContext {
  const AccumulatorParams& params;
  const SymmetricKey& key;
  const RetentionPolicy& policy;
  std::optional<Time> requested_time;  // t the bundle was requested for
  std::chrono::nanoseconds response_time{0};
  TimeBound bound{};
  /// Verifier's clock at the request; served_at must lie within clock_skew of it.
  std::optional<Time> now;
  Time clock_skew = 0;
};

/// Full user-side check: membership, completeness, then the state path the
/// bundle claims. Never throws for bad bundles; failures land in the report.
VerificationReport verify_as_user(ByteView device_id, const AttestationBundle& bundle, const VerifyContext& ctx);

/// SDP variant: same checks without membership.
VerificationReport verify_as_sdp(const AttestationBundle& bundle, const VerifyContext& ctx);

/// A time range verifies iff every epoch in it does.
bool range_verified(std::span<const VerificationReport> reports) noexcept;

}  // namespace expunge
