#ifndef CAHICHA_SOFTAUTH_SOFT_AUTHENTICATOR_H_
#define CAHICHA_SOFTAUTH_SOFT_AUTHENTICATOR_H_

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cahicha/codec/authenticator_data.h"
#include "cahicha/crypto/random.h"
#include "cahicha/engine/creation_options.h"
#include "cahicha/engine/verification_engine.h"
#include "cahicha/softauth/fixture_pki.h"

namespace cahicha::softauth {

enum class AttestationMode { kPackedX5c, kPackedSelf, kNone };

// Knobs for honest, bot-like and adversarial responses. The default is an
// honest authenticator using self attestation.
struct AuthenticatorBehavior {
  bool set_up = true;
  bool set_uv = true;
  AttestationMode attestation = AttestationMode::kPackedSelf;
  codec::Aaguid aaguid{};
  std::optional<Bytes> wrong_challenge;
  std::optional<std::string> wrong_origin;
  bool corrupt_signature = false;
  uint32_t sign_count_start = 0;
  // Replaces the whole flags byte, overriding set_up/set_uv and the AT bit.
  // The attested credential data is still appended.
  std::optional<uint8_t> raw_flags;
};

class UnsupportedOption : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Software stand-in for a FIDO2 authenticator's cryptographic duties.
// Produces byte-exact attestation responses; no transport, no UI.
class SoftAuthenticator {
 public:
  // Secure randomness.
  SoftAuthenticator();
  // Seeded: identical seed, identity and behavior give identical bytes.
  explicit SoftAuthenticator(uint64_t seed);

  SoftAuthenticator(const SoftAuthenticator&) = delete;
  SoftAuthenticator& operator=(const SoftAuthenticator&) = delete;

  // Required for AttestationMode::kPackedX5c.
  void set_attestation_identity(std::shared_ptr<const AttestationIdentity> identity) {
    identity_ = std::move(identity);
  }

  // Throws UnsupportedOption when ES256 is not offered, or when packed-x5c
  // is requested without an attestation identity.
  engine::AttestationResponse CreateCredential(const engine::CreationOptions& options,
                                               std::string_view origin,
                                               const AuthenticatorBehavior& behavior,
                                               std::string record_id = {});

  // Byte-identical copy.
  static engine::AttestationResponse ReplayResponse(const engine::AttestationResponse& previous) {
    return previous;
  }

 private:
  std::unique_ptr<crypto::RandomSource> owned_rng_;
  crypto::RandomSource* rng_;
  std::shared_ptr<const AttestationIdentity> identity_;
};

// The JSON body the verify endpoint accepts; also the golden-fixture file
// format.
nlohmann::json ResponseToJson(const engine::AttestationResponse& response,
                              std::string_view redirect_to = "/");
engine::AttestationResponse ResponseFromJson(const nlohmann::json& j);

}  // namespace cahicha::softauth

#endif  // CAHICHA_SOFTAUTH_SOFT_AUTHENTICATOR_H_
