#include "cahicha/engine/creation_options.h"

#include <stdexcept>

namespace cahicha::engine {

nlohmann::json CreationOptions::ToJson() const {
  nlohmann::json params = nlohmann::json::array();
  for (int64_t alg : pub_key_cred_params) params.push_back({{"type", "public-key"}, {"alg", alg}});
  return {
      {"challenge", challenge},
      {"rp", {{"id", rp_id}, {"name", rp_name}}},
      {"user", {{"id", user_id}, {"name", user_name}, {"displayName", user_display_name}}},
      {"pubKeyCredParams", params},
      {"authenticatorSelection",
       {{"userVerification", user_verification}, {"residentKey", "discouraged"}}},
      {"attestation", attestation},
      {"timeout", timeout_ms},
  };
}

CreationOptions CreationOptions::FromJson(const nlohmann::json& j) {
  try {
    CreationOptions o;
    o.challenge = j.at("challenge").get<std::string>();
    o.rp_id = j.at("rp").at("id").get<std::string>();
    o.rp_name = j.at("rp").value("name", std::string());
    o.user_id = j.at("user").at("id").get<std::string>();
    o.user_name = j.at("user").value("name", std::string());
    o.user_display_name = j.at("user").value("displayName", std::string());
    for (const auto& p : j.at("pubKeyCredParams")) o.pub_key_cred_params.push_back(p.at("alg").get<int64_t>());
    o.user_verification =
        j.at("authenticatorSelection").value("userVerification", std::string("preferred"));
    o.attestation = j.value("attestation", std::string("none"));
    o.timeout_ms = j.value("timeout", uint64_t{0});
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("creation options: ") + e.what());
  }
}

}  // namespace cahicha::engine
