#ifndef CAHICHA_ENGINE_VERIFICATION_ENGINE_H_
#define CAHICHA_ENGINE_VERIFICATION_ENGINE_H_

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "cahicha/codec/authenticator_data.h"
#include "cahicha/codec/cose_key.h"
#include "cahicha/crypto/bytes.h"
#include "cahicha/engine/challenge_store.h"
#include "cahicha/engine/creation_options.h"
#include "cahicha/engine/policy.h"
#include "cahicha/mds/trust_store.h"

namespace cahicha::engine {

struct AttestationResponse {
  std::string record_id;
  Bytes attestation_object;
  Bytes client_data_json;
};

enum class Verdict { kHuman, kRejected };

// Ordered by the pipeline step that produces them.
enum class RejectionReason {
  kMalformed,
  kOriginMismatch,
  kChallengeMismatch,
  kChallengeReplayed,
  kChallengeExpired,
  kRpIdMismatch,
  kMissingUserPresence,
  kMissingUserVerification,
  kBadSignature,
  kUntrustedAuthenticator,
};

std::string_view ReasonName(RejectionReason reason);

struct VerificationOutcome {
  Verdict verdict = Verdict::kRejected;
  std::optional<RejectionReason> reason;
  std::optional<codec::Aaguid> aaguid;
  std::string attestation_format;
  // Diagnostic only; not enforced (the ceremony keeps no credential state).
  uint32_t sign_count = 0;
  std::string detail;

  bool human() const { return verdict == Verdict::kHuman; }
};

struct IssuedChallenge {
  ChallengeRecord record;
  CreationOptions options;
};

// True iff |signature| verifies over auth_data || client_data_hash under
// |key|. Throws CodecError(kUnsupportedAlgorithm) for algorithms outside
// ES256/RS256.
bool VerifySignature(ByteView auth_data_bytes, const Sha256Digest& client_data_hash,
                     ByteView signature, const codec::CosePublicKey& key);

class VerificationEngine {
 public:
  // Throws std::invalid_argument when Strict mode has no trust store.
  VerificationEngine(VerificationPolicy policy, std::shared_ptr<mds::TrustStoreHandle> trust,
                     crypto::RandomSource& rng = crypto::DefaultRandom());

  // Throws crypto::EntropyUnavailable or ChallengeStoreFull.
  IssuedChallenge IssueChallenge(Timestamp now);

  // Runs the pipeline: client data and origin; challenge binding (consumes
  // the record); authenticator data (RP ID hash, UP, UV); signature; and in
  // Strict mode the attestation chain. The first failing step decides the
  // reason. Never throws for bad input.
  VerificationOutcome Verify(const AttestationResponse& response, Timestamp now);

  const VerificationPolicy& policy() const { return policy_; }
  ChallengeStore& challenges() { return challenges_; }

 private:
  VerificationPolicy policy_;
  Sha256Digest rp_id_hash_;
  std::shared_ptr<mds::TrustStoreHandle> trust_;
  crypto::RandomSource& rng_;
  ChallengeStore challenges_;
};

}  // namespace cahicha::engine

#endif  // CAHICHA_ENGINE_VERIFICATION_ENGINE_H_
