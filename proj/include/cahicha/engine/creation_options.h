#ifndef CAHICHA_ENGINE_CREATION_OPTIONS_H_
#define CAHICHA_ENGINE_CREATION_OPTIONS_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cahicha/crypto/bytes.h"
#include "cahicha/engine/policy.h"

namespace cahicha::engine {

// PublicKeyCredentialCreationOptions in its JSON transport form: binary
// members are base64url strings.
struct CreationOptions {
  std::string challenge;
  std::string rp_id;
  std::string rp_name;
  std::string user_id;
  std::string user_name;
  std::string user_display_name;
  std::vector<int64_t> pub_key_cred_params;
  std::string user_verification;  // "required" | "preferred"
  std::string attestation;        // always "direct"
  uint64_t timeout_ms = 0;

  nlohmann::json ToJson() const;
  // Throws std::invalid_argument for missing or mistyped members.
  static CreationOptions FromJson(const nlohmann::json& j);
};

}  // namespace cahicha::engine

#endif  // CAHICHA_ENGINE_CREATION_OPTIONS_H_
