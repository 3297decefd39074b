#include "cahicha/engine/verification_engine.h"

#include <algorithm>
#include <stdexcept>

#include "cahicha/codec/attestation_object.h"
#include "cahicha/codec/base64.h"
#include "cahicha/codec/client_data.h"
#include "cahicha/codec/errors.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/x509.h"

namespace cahicha::engine {
namespace {

constexpr char kUserName[] = "cahicha-visitor";
constexpr char kUserDisplayName[] = "Visitor";

VerificationOutcome Reject(RejectionReason reason, std::string detail) {
  VerificationOutcome out;
  out.verdict = Verdict::kRejected;
  out.reason = reason;
  out.detail = std::move(detail);
  return out;
}

Bytes SignedData(ByteView auth_data_bytes, const Sha256Digest& client_data_hash) {
  Bytes data(auth_data_bytes.begin(), auth_data_bytes.end());
  data.insert(data.end(), client_data_hash.begin(), client_data_hash.end());
  return data;
}

bool VerifyWithKey(const EVP_PKEY* key, int64_t alg, ByteView message, ByteView signature) {
  switch (alg) {
    case static_cast<int64_t>(codec::CoseAlgorithm::kEs256):
      return crypto::VerifyEs256(key, message, signature);
    case static_cast<int64_t>(codec::CoseAlgorithm::kRs256):
      return crypto::VerifyRs256(key, message, signature);
    default:
      throw codec::CodecError(codec::CodecErrc::kUnsupportedAlgorithm, std::to_string(alg));
  }
}

}  // namespace

std::string_view ReasonName(RejectionReason reason) {
  switch (reason) {
    case RejectionReason::kMalformed:
      return "Malformed";
    case RejectionReason::kOriginMismatch:
      return "OriginMismatch";
    case RejectionReason::kChallengeMismatch:
      return "ChallengeMismatch";
    case RejectionReason::kChallengeReplayed:
      return "ChallengeReplayed";
    case RejectionReason::kChallengeExpired:
      return "ChallengeExpired";
    case RejectionReason::kRpIdMismatch:
      return "RpIdMismatch";
    case RejectionReason::kMissingUserPresence:
      return "MissingUserPresence";
    case RejectionReason::kMissingUserVerification:
      return "MissingUserVerification";
    case RejectionReason::kBadSignature:
      return "BadSignature";
    case RejectionReason::kUntrustedAuthenticator:
      return "UntrustedAuthenticator";
  }
  return "Unknown";
}

bool VerifySignature(ByteView auth_data_bytes, const Sha256Digest& client_data_hash,
                     ByteView signature, const codec::CosePublicKey& key) {
  const int64_t alg = static_cast<int64_t>(key.algorithm);
  if (!codec::IsSupportedAlgorithm(alg))
    throw codec::CodecError(codec::CodecErrc::kUnsupportedAlgorithm, std::to_string(alg));
  const crypto::EvpPkeyPtr evp = key.ToEvpKey();
  return VerifyWithKey(evp.get(), alg, SignedData(auth_data_bytes, client_data_hash), signature);
}

VerificationEngine::VerificationEngine(VerificationPolicy policy,
                                       std::shared_ptr<mds::TrustStoreHandle> trust,
                                       crypto::RandomSource& rng)
    : policy_(std::move(policy)),
      rp_id_hash_(crypto::Sha256(AsBytes(policy_.rp_id))),
      trust_(std::move(trust)),
      rng_(rng),
      challenges_(rng) {
  if (policy_.mode == Mode::kStrict && (!trust_ || !trust_->Get()))
    throw std::invalid_argument("strict mode requires a loaded metadata trust store");
  if (policy_.expected_origins.empty())
    throw std::invalid_argument("at least one expected origin is required");
}

IssuedChallenge VerificationEngine::IssueChallenge(Timestamp now) {
  IssuedChallenge issued;
  issued.record = challenges_.Issue(policy_.rp_id, now, policy_.challenge_ttl);

  CreationOptions& o = issued.options;
  o.challenge = codec::EncodeBase64Url(issued.record.challenge);
  o.rp_id = policy_.rp_id;
  o.rp_name = policy_.rp_name;
  o.user_id = codec::EncodeBase64Url(rng_.Generate(16));
  o.user_name = kUserName;
  o.user_display_name = kUserDisplayName;
  o.pub_key_cred_params = {static_cast<int64_t>(codec::CoseAlgorithm::kEs256),
                           static_cast<int64_t>(codec::CoseAlgorithm::kRs256)};
  const bool uv_required =
      policy_.require_uv || policy_.advertised_uv == UserVerificationRequirement::kRequired;
  o.user_verification = uv_required ? "required" : "preferred";
  o.attestation = "direct";
  o.timeout_ms = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(policy_.challenge_ttl).count());
  return issued;
}

VerificationOutcome VerificationEngine::Verify(const AttestationResponse& response,
                                               Timestamp now) {
  // Client data: ceremony type and origin.
  codec::ClientData client_data;
  try {
    client_data = codec::ParseClientData(response.client_data_json);
  } catch (const codec::CodecError& e) {
    return Reject(RejectionReason::kMalformed, e.what());
  }
  if (std::find(policy_.expected_origins.begin(), policy_.expected_origins.end(),
                client_data.origin) == policy_.expected_origins.end())
    return Reject(RejectionReason::kOriginMismatch, client_data.origin);

  // Challenge binding and replay protection.
  Bytes presented;
  try {
    presented = codec::DecodeBase64Url(client_data.challenge);
  } catch (const codec::CodecError& e) {
    return Reject(RejectionReason::kMalformed, std::string("client data challenge: ") + e.what());
  }
  switch (challenges_.Consume(response.record_id, presented, now, policy_.challenge_ttl)) {
    case ConsumeResult::kConsumed:
      break;
    case ConsumeResult::kUnknownRecord:
      return Reject(RejectionReason::kChallengeMismatch, "unknown challenge record");
    case ConsumeResult::kMismatch:
      return Reject(RejectionReason::kChallengeMismatch, "challenge differs from record");
    case ConsumeResult::kReplayed:
      return Reject(RejectionReason::kChallengeReplayed, "challenge already used");
    case ConsumeResult::kExpired:
      return Reject(RejectionReason::kChallengeExpired, "challenge older than TTL");
  }

  // Authenticator data: RP ID hash and flags live in the fixed header and
  // are judged before the variable-length part is parsed.
  codec::AttestationEnvelope envelope;
  try {
    envelope = codec::DecodeAttestationEnvelope(response.attestation_object);
  } catch (const codec::CodecError& e) {
    return Reject(RejectionReason::kMalformed, e.what());
  }
  const Bytes& auth_data_bytes = envelope.auth_data_bytes;
  if (auth_data_bytes.size() < codec::kAuthenticatorDataMinSize)
    return Reject(RejectionReason::kMalformed, "authenticator data shorter than 37 bytes");
  if (!crypto::ConstantTimeEquals(ByteView(auth_data_bytes).first(32), rp_id_hash_))
    return Reject(RejectionReason::kRpIdMismatch, "rp_id_hash differs from sha256(rp_id)");
  const codec::FlagSet flags(auth_data_bytes[32]);
  if (!flags.up()) return Reject(RejectionReason::kMissingUserPresence, "UP flag clear");
  if (policy_.require_uv && !flags.uv())
    return Reject(RejectionReason::kMissingUserVerification, "UV flag clear");
  codec::AuthenticatorData auth_data;
  try {
    auth_data = codec::ParseAuthenticatorData(auth_data_bytes);
  } catch (const codec::CodecError& e) {
    return Reject(RejectionReason::kMalformed, e.what());
  }
  if (!auth_data.attested_credential)
    return Reject(RejectionReason::kMalformed, "no attested credential data");
  const codec::AttestedCredentialData& credential = *auth_data.attested_credential;

  // Attestation signature.
  const codec::AttestationStatement& stmt = envelope.statement;
  if (envelope.format == codec::AttestationFormat::kPacked) {
    const Bytes signed_data = SignedData(auth_data_bytes, client_data.Hash());
    try {
      if (stmt.x5c.empty()) {
        if (stmt.algorithm != static_cast<int64_t>(credential.public_key.algorithm))
          return Reject(RejectionReason::kBadSignature,
                        "self attestation alg differs from credential key");
        if (!VerifySignature(auth_data_bytes, client_data.Hash(), stmt.signature,
                             credential.public_key))
          return Reject(RejectionReason::kBadSignature, "self attestation signature");
      } else {
        crypto::X509Ptr leaf = crypto::ParseCertificateDer(stmt.x5c.front());
        if (!leaf) return Reject(RejectionReason::kMalformed, "attestation certificate");
        crypto::EvpPkeyPtr leaf_key = crypto::CertificatePublicKey(leaf.get());
        if (!VerifyWithKey(leaf_key.get(), stmt.algorithm, signed_data, stmt.signature))
          return Reject(RejectionReason::kBadSignature, "attestation certificate signature");
      }
    } catch (const codec::CodecError& e) {
      return Reject(RejectionReason::kBadSignature, e.what());
    }
  }

  // Authenticator trustworthiness.
  if (policy_.mode == Mode::kStrict) {
    if (stmt.x5c.empty())
      return Reject(RejectionReason::kUntrustedAuthenticator, "no attestation certificate chain");
    const std::shared_ptr<const mds::TrustStore> store = trust_->Get();
    if (!store) return Reject(RejectionReason::kUntrustedAuthenticator, "no metadata loaded");
    const mds::ChainValidation chain =
        mds::ValidateAttestationChain(stmt.x5c, credential.aaguid, *store, now);
    if (!chain) return Reject(RejectionReason::kUntrustedAuthenticator, chain.reason);
  }

  VerificationOutcome out;
  out.verdict = Verdict::kHuman;
  out.aaguid = credential.aaguid;
  out.attestation_format = std::string(codec::FormatName(envelope.format));
  out.sign_count = auth_data.sign_count;
  return out;
}

}  // namespace cahicha::engine
