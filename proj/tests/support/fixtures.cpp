#include "fixtures.hpp"

#include <random>

#include <fmt/format.h>

namespace expunge::testing {

const AccumulatorParams& toy_params() {
  static const auto p = AccumulatorParams::unsafe_from_primes(BigInt(61), BigInt(53), BigInt(2));
  return p;
}

const AccumulatorParams& params512() {
  static const auto p = AccumulatorParams::setup(512);
  return p;
}

const AccumulatorParams& params2048() {
  static const auto p = AccumulatorParams::setup(2048);
  return p;
}

Digest digest_from_hex(std::string_view hex) {
  auto b = from_hex(hex);
  if (b.size() != kDigestSize) throw Error(ErrorCode::Encoding, "digest hex must be 64 characters");
  Digest d{};
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

std::string mac(unsigned i) {
  return fmt::format("02:00:00:00:{:02x}:{:02x}", (i >> 8) & 0xff, i & 0xff);
}

SensorReading make_reading(const std::string& device, Time t, std::size_t payload_size) {
  Bytes payload(payload_size);
  for (std::size_t i = 0; i < payload_size; ++i) payload[i] = static_cast<std::uint8_t>(t + i);
  return SensorReading{to_bytes(device), t, std::move(payload)};
}

TempDir::TempDir() {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() / fmt::format("expunge-test-{:016x}", (std::uint64_t{rd()} << 32) | rd());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Protocol::Protocol(const AccumulatorParams& p, std::uint32_t p_del, std::optional<std::uint32_t> p_ver, Time delta,
                   bool lazy)
    : keys(KeyRing::generate()),
      params(p),
      policy(p_del, p_ver, delta),
      store(CloudConfig{policy, params, {"sp-1"}, std::nullopt, lazy, true}),
      control(params, ControlKeys{keys.enclave.public_key, keys.shared_key}) {}

OutsourcePayload Protocol::outsource(const EpochWindow& w, const std::vector<SensorReading>& readings) {
  auto payload = control.process(w, readings);
  store.ingest(payload);
  return payload;
}

VerifyContext Protocol::context(Time requested, Time now) const {
  return VerifyContext{params, keys.shared_key, policy, requested, std::chrono::nanoseconds(0),
                       TimeBound{{}, false}, now};
}

}  // namespace expunge::testing
