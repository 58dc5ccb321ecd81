#include "expunge/attestation.hpp"

#include <algorithm>

#include "expunge/control_phase.hpp"
#include "expunge/hash.hpp"

namespace expunge {

std::vector<std::uint64_t> verify_membership(ByteView device_id, const AttestationBundle& bundle) {
  std::vector<std::uint64_t> positions;
  for (std::uint64_t y = 1; y <= bundle.digests.size(); ++y)
    if (reading_digest(device_id, bundle.epoch_id(), y) == bundle.digests[y - 1]) positions.push_back(y);
  return positions;
}

CompletenessResult verify_completeness(const AttestationBundle& bundle, const AccumulatorParams& params) {
  CompletenessResult out;
  if (bundle.digests.empty()) return out;
  const auto prev = bundle.prev_crypto_time.value_or(params.seed());
  out.alpha = epoch_timestamp(prev, bundle.digests, params);
  out.ok = *out.alpha == bundle.crypto_time;
  return out;
}

AccessibleResult verify_accessible(const AttestationBundle& bundle, const SymmetricKey& key,
                                   const RetentionPolicy& policy) {
  AccessibleResult out;
  auto a_tag = decrypt_tag(key, bundle.epoch_id(), bundle.enc_state_tag);
  out.user_hash = accessible_tag(bundle.ciphertexts);
  out.hash_ok = out.user_hash == a_tag;
  out.policy_ok = bundle.state == DataState::Accessible &&
                  state_at(bundle.window, policy, bundle.served_at) == DataState::Accessible;
  return out;
}

std::string_view to_string(TimeBoundOutcome t) noexcept {
  switch (t) {
    case TimeBoundOutcome::Ok: return "ok";
    case TimeBoundOutcome::Violated: return "violated";
    case TimeBoundOutcome::NotApplicable: return "not-applicable";
  }
  return "unknown";
}

TimeBound calibrate_time_bound(std::chrono::nanoseconds round_trip, std::size_t cell_count, std::size_t cell_size) {
  auto estimate = expunge_duration_estimate(cell_count, cell_size);
  TimeBound b;
  b.tau = std::max(2 * round_trip, estimate / 10);
  b.applicable = estimate >= 4 * round_trip;
  return b;
}

VerificationReport verify_irrecoverable(const AttestationBundle& bundle, const SymmetricKey& key,
                                        const RetentionPolicy& policy, std::chrono::nanoseconds response_time,
                                        const TimeBound& bound) {
  if (!bundle.deletion_proof) throw Error(ErrorCode::Protocol, "irrecoverable bundle carries no deletion proof");
  VerificationReport r;
  r.epoch_id = bundle.epoch_id();
  r.state_claimed = bundle.state;
  r.state_expected = state_at(bundle.window, policy, bundle.served_at);
  auto ir_tag = decrypt_tag(key, bundle.epoch_id(), bundle.enc_state_tag);

  bool proof_ok = bundle.deletion_proof->proof == ir_tag && bundle.deletion_proof->epoch_id == bundle.epoch_id();
  // The overwritten cells, when shipped, must hash to the proof they back.
  if (bundle.cells) proof_ok = proof_ok && proof_digest(*bundle.cells) == bundle.deletion_proof->proof;
  r.proof_matches = proof_ok;
  r.tag_ok = proof_ok;
  const Time produced = bundle.deletion_proof->produced_at;
  r.policy_ok = bundle.state == DataState::Irrecoverable && r.state_expected == DataState::Irrecoverable &&
                produced >= deletion_due(bundle.window, policy) && produced <= bundle.served_at;
  r.state_ok = r.tag_ok && r.policy_ok;

  r.response_time = response_time;
  r.time_bound_limit = bound.tau;
  if (!bound.applicable) r.time_bound = TimeBoundOutcome::NotApplicable;
  else r.time_bound = response_time <= bound.tau ? TimeBoundOutcome::Ok : TimeBoundOutcome::Violated;
  return r;
}

namespace {

VerificationReport verify_common(std::optional<ByteView> device_id, const AttestationBundle& bundle,
                                 const VerifyContext& ctx) {
  VerificationReport r;
  r.epoch_id = bundle.epoch_id();
  r.state_claimed = bundle.state;
  r.state_expected = state_at(bundle.window, ctx.policy, bundle.served_at);
  r.request_ok = bundle.window.delta() == ctx.policy.delta() &&
                 (!ctx.requested_time || bundle.window.contains(*ctx.requested_time));
  if (ctx.now) {
    const Time lo = *ctx.now > ctx.clock_skew ? *ctx.now - ctx.clock_skew : 0;
    r.request_ok = r.request_ok && bundle.served_at >= lo && bundle.served_at <= *ctx.now + ctx.clock_skew;
  }
  try {
    if (device_id) {
      r.membership_checked = true;
      r.membership_positions = verify_membership(*device_id, bundle);
    }
    auto completeness = verify_completeness(bundle, ctx.params);
    r.recomputed_alpha = completeness.alpha;
    // E_K(CT_j) must agree with the cleartext CT_j the chain was checked against.
    auto enc_ct = open_meta_field(ctx.key, bundle.epoch_id(), bundle.enc_crypto_time);
    r.completeness_ok = completeness.ok && enc_ct == bundle.crypto_time.to_bytes(ctx.params);

    switch (bundle.state) {
      case DataState::Accessible: {
        auto acc = verify_accessible(bundle, ctx.key, ctx.policy);
        r.recomputed_user_hash = acc.user_hash;
        r.tag_ok = acc.hash_ok;
        r.policy_ok = acc.policy_ok;
        const bool shape_ok = bundle.digests.size() == bundle.ciphertexts.size() ||
                              (bundle.digests.size() == 1 && bundle.ciphertexts.empty());
        r.state_ok = acc.ok() && shape_ok;
        r.time_bound = TimeBoundOutcome::NotApplicable;
        r.response_time = ctx.response_time;
        break;
      }
      case DataState::Irrecoverable: {
        auto ir = verify_irrecoverable(bundle, ctx.key, ctx.policy, ctx.response_time, ctx.bound);
        r.tag_ok = ir.tag_ok;
        r.policy_ok = ir.policy_ok;
        r.state_ok = ir.state_ok;
        r.proof_matches = ir.proof_matches;
        r.response_time = ir.response_time;
        r.time_bound_limit = ir.time_bound_limit;
        r.time_bound = ir.time_bound;
        break;
      }
      case DataState::Purged:
        r.error = "bundle claims purged state";
        break;
    }
  } catch (const Error& e) {
    r.error = std::string(to_string(e.code())) + ": " + e.what();
    r.state_ok = false;
  }
  return r;
}

}  // namespace

VerificationReport verify_as_user(ByteView device_id, const AttestationBundle& bundle, const VerifyContext& ctx) {
  return verify_common(device_id, bundle, ctx);
}

VerificationReport verify_as_sdp(const AttestationBundle& bundle, const VerifyContext& ctx) {
  return verify_common(std::nullopt, bundle, ctx);
}

bool range_verified(std::span<const VerificationReport> reports) noexcept {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.verified(); });
}

}  // namespace expunge
