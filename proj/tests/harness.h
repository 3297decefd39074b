#ifndef CAHICHA_TESTS_HARNESS_H_
#define CAHICHA_TESTS_HARNESS_H_

#include <memory>
#include <optional>

#include "cahicha/crypto/random.h"
#include "cahicha/engine/verification_engine.h"
#include "cahicha/mds/trust_store.h"
#include "cahicha/softauth/fixture_pki.h"
#include "cahicha/softauth/soft_authenticator.h"

namespace cahicha::testing {

inline constexpr codec::Aaguid kRegisteredAaguid = {0xca, 0x41, 0xc4, 0xa0, 0x00, 0x01, 0x40, 0x00,
                                                    0x80, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01};
inline constexpr codec::Aaguid kUnregisteredAaguid = {0xca, 0x41, 0xc4, 0xa0, 0x00, 0x02, 0x40, 0x00,
                                                      0x80, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x02};
inline constexpr char kOrigin[] = "https://localhost";

// One fixture PKI per process: a vendor CA whose attestation root is
// registered for kRegisteredAaguid in a signed metadata blob.
class TrustFixture {
 public:
  static const TrustFixture& Get() {
    static const TrustFixture instance;
    return instance;
  }

  const softauth::FixtureAuthority& authority() const { return authority_; }
  const std::string& blob() const { return blob_; }
  std::shared_ptr<mds::TrustStoreHandle> NewHandle() const {
    return std::make_shared<mds::TrustStoreHandle>(
        mds::LoadMdsBlob(blob_, authority_.mds_root().der()).store);
  }
  std::shared_ptr<const softauth::AttestationIdentity> IdentityFor(const codec::Aaguid& a) const {
    return a == kRegisteredAaguid ? registered_ : unregistered_;
  }

 private:
  TrustFixture()
      : blob_(authority_.MdsBlobFor({kRegisteredAaguid})),
        registered_(std::make_shared<softauth::AttestationIdentity>(
            authority_.IssueAttestationIdentity(kRegisteredAaguid))),
        unregistered_(std::make_shared<softauth::AttestationIdentity>(
            authority_.IssueAttestationIdentity(kUnregisteredAaguid))) {}

  softauth::FixtureAuthority authority_;
  std::string blob_;
  std::shared_ptr<const softauth::AttestationIdentity> registered_;
  std::shared_ptr<const softauth::AttestationIdentity> unregistered_;
};

inline softauth::AuthenticatorBehavior Honest(
    softauth::AttestationMode mode = softauth::AttestationMode::kPackedX5c,
    const codec::Aaguid& aaguid = kRegisteredAaguid) {
  softauth::AuthenticatorBehavior b;
  b.attestation = mode;
  b.aaguid = aaguid;
  return b;
}

// An engine plus a soft authenticator answering its challenges. A nonzero
// seed makes challenge issuance reproducible, so two harnesses with the
// same seed issue identical records.
class CeremonyHarness {
 public:
  explicit CeremonyHarness(engine::Mode mode, uint64_t seed = 0,
                           std::optional<engine::VerificationPolicy> policy = std::nullopt)
      : rng_(seed ? std::unique_ptr<crypto::RandomSource>(new crypto::SeededRandom(seed))
                  : std::unique_ptr<crypto::RandomSource>(new crypto::SecureRandom())),
        engine_(policy.value_or(engine::VerificationPolicy::ForMode(mode)),
                TrustFixture::Get().NewHandle(), *rng_) {}

  engine::IssuedChallenge Issue(engine::Timestamp now = engine::Clock::now()) {
    return engine_.IssueChallenge(now);
  }

  engine::AttestationResponse Answer(const engine::IssuedChallenge& issued,
                                     const softauth::AuthenticatorBehavior& behavior) {
    authenticator_.set_attestation_identity(TrustFixture::Get().IdentityFor(behavior.aaguid));
    return authenticator_.CreateCredential(issued.options, kOrigin, behavior,
                                           issued.record.record_id);
  }

  engine::AttestationResponse Respond(const softauth::AuthenticatorBehavior& behavior,
                                      engine::Timestamp now = engine::Clock::now()) {
    return Answer(Issue(now), behavior);
  }

  engine::VerificationOutcome Verify(const engine::AttestationResponse& response,
                                     engine::Timestamp now = engine::Clock::now()) {
    return engine_.Verify(response, now);
  }

  engine::VerificationEngine& engine() { return engine_; }

 private:
  std::unique_ptr<crypto::RandomSource> rng_;
  engine::VerificationEngine engine_;
  softauth::SoftAuthenticator authenticator_;
};

}  // namespace cahicha::testing

#endif  // CAHICHA_TESTS_HARNESS_H_
