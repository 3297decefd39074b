#include "cahicha/softauth/soft_authenticator.h"

#include <algorithm>

#include "cahicha/codec/attestation_object.h"
#include "cahicha/codec/base64.h"
#include "cahicha/codec/cbor.h"
#include "cahicha/codec/client_data.h"
#include "cahicha/codec/cose_key.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/keys.h"

namespace cahicha::softauth {
namespace {

constexpr size_t kCredentialIdSize = 32;

// Member order follows what browsers emit.
Bytes BuildClientData(std::string_view challenge_b64, std::string_view origin) {
  nlohmann::ordered_json j;
  j["type"] = codec::kCreateCeremonyType;
  j["challenge"] = challenge_b64;
  j["origin"] = origin;
  j["crossOrigin"] = false;
  return ToBytes(j.dump());
}

}  // namespace

SoftAuthenticator::SoftAuthenticator() : rng_(&crypto::DefaultRandom()) {}

SoftAuthenticator::SoftAuthenticator(uint64_t seed)
    : owned_rng_(std::make_unique<crypto::SeededRandom>(seed)), rng_(owned_rng_.get()) {}

engine::AttestationResponse SoftAuthenticator::CreateCredential(
    const engine::CreationOptions& options, std::string_view origin,
    const AuthenticatorBehavior& behavior, std::string record_id) {
  const auto& params = options.pub_key_cred_params;
  if (std::find(params.begin(), params.end(),
                static_cast<int64_t>(codec::CoseAlgorithm::kEs256)) == params.end())
    throw UnsupportedOption("ES256 not among pubKeyCredParams");
  if (behavior.attestation == AttestationMode::kPackedX5c && !identity_)
    throw UnsupportedOption("packed-x5c requires an attestation identity");

  const std::string challenge = behavior.wrong_challenge
                                    ? codec::EncodeBase64Url(*behavior.wrong_challenge)
                                    : options.challenge;
  const Bytes client_data =
      BuildClientData(challenge, behavior.wrong_origin ? *behavior.wrong_origin : origin);

  crypto::EvpPkeyPtr credential_key = crypto::GenerateP256Key(*rng_);

  codec::AuthenticatorData auth;
  auth.rp_id_hash = crypto::Sha256(AsBytes(options.rp_id));
  uint8_t flags = codec::FlagSet::kAttestedCredential;
  if (behavior.set_up) flags |= codec::FlagSet::kUserPresent;
  if (behavior.set_uv) flags |= codec::FlagSet::kUserVerified;
  auth.flags = codec::FlagSet(behavior.raw_flags.value_or(flags));
  auth.sign_count = behavior.sign_count_start;
  codec::AttestedCredentialData cred;
  cred.aaguid = behavior.aaguid;
  cred.credential_id = rng_->Generate(kCredentialIdSize);
  cred.public_key = codec::CosePublicKey::FromP256(crypto::P256PointOf(credential_key.get()));
  cred.public_key_cbor = cbor::Encode(cred.public_key.ToCbor());
  auth.attested_credential = std::move(cred);
  const Bytes auth_bytes = auth.Serialize();

  const Sha256Digest cdh = crypto::Sha256(client_data);
  Bytes signed_data = auth_bytes;
  signed_data.insert(signed_data.end(), cdh.begin(), cdh.end());

  codec::AttestationStatement stmt;
  codec::AttestationFormat format = codec::AttestationFormat::kPacked;
  switch (behavior.attestation) {
    case AttestationMode::kPackedSelf:
      stmt.algorithm = static_cast<int64_t>(codec::CoseAlgorithm::kEs256);
      stmt.signature = crypto::SignEs256(credential_key.get(), signed_data);
      break;
    case AttestationMode::kPackedX5c:
      stmt.algorithm = static_cast<int64_t>(codec::CoseAlgorithm::kEs256);
      stmt.signature = crypto::SignEs256(identity_->key.get(), signed_data);
      stmt.x5c = identity_->x5c;
      break;
    case AttestationMode::kNone:
      format = codec::AttestationFormat::kNone;
      break;
  }
  // Lands in the low byte of s, so the DER stays well formed.
  if (behavior.corrupt_signature && !stmt.signature.empty()) stmt.signature.back() ^= 0x01;

  engine::AttestationResponse out;
  out.record_id = std::move(record_id);
  out.attestation_object = codec::EncodeAttestationObject(format, stmt, auth_bytes);
  out.client_data_json = client_data;
  return out;
}

nlohmann::json ResponseToJson(const engine::AttestationResponse& response,
                              std::string_view redirect_to) {
  return {
      {"record_id", response.record_id},
      {"attestation_object_b64", codec::EncodeBase64Url(response.attestation_object)},
      {"client_data_b64", codec::EncodeBase64Url(response.client_data_json)},
      {"redirect_to", redirect_to},
  };
}

engine::AttestationResponse ResponseFromJson(const nlohmann::json& j) {
  engine::AttestationResponse out;
  out.record_id = j.at("record_id").get<std::string>();
  out.attestation_object = codec::DecodeBase64Url(j.at("attestation_object_b64").get<std::string>());
  out.client_data_json = codec::DecodeBase64Url(j.at("client_data_b64").get<std::string>());
  return out;
}

}  // namespace cahicha::softauth
