#ifndef CAHICHA_ENGINE_POLICY_H_
#define CAHICHA_ENGINE_POLICY_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cahicha::engine {

using Clock = std::chrono::system_clock;
using Timestamp = Clock::time_point;

// Strict enforces attestation-chain validation against the metadata trust
// store; General accepts any authenticator that proves presence.
enum class Mode { kStrict, kGeneral };

std::string_view ModeName(Mode mode);
std::optional<Mode> ParseMode(std::string_view name);

// What the creation options advertise to the browser. Independent of
// whether the verifier insists on the UV bit.
enum class UserVerificationRequirement { kRequired, kPreferred };

struct VerificationPolicy {
  Mode mode = Mode::kGeneral;
  std::string rp_id = "localhost";
  std::string rp_name = "CAHICHA";
  // Exact scheme://host[:port] strings.
  std::vector<std::string> expected_origins = {"https://localhost"};
  // Whether the UV flag must be set for a Human verdict.
  bool require_uv = false;
  UserVerificationRequirement advertised_uv = UserVerificationRequirement::kRequired;
  std::chrono::seconds challenge_ttl{120};

  // Strict requires UV; General requires only UP.
  static VerificationPolicy ForMode(Mode mode);
};

}  // namespace cahicha::engine

#endif  // CAHICHA_ENGINE_POLICY_H_
