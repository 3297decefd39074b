#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/random.h"
#include "cahicha/engine/challenge_store.h"
#include "cahicha/engine/creation_options.h"
#include "cahicha/engine/verification_engine.h"
#include "harness.h"

namespace cahicha::engine {
namespace {

using softauth::AttestationMode;
using softauth::AuthenticatorBehavior;
using testing::CeremonyHarness;
using testing::Honest;
using testing::kRegisteredAaguid;
using testing::kUnregisteredAaguid;

constexpr auto kTtl = std::chrono::seconds(120);

RejectionReason ReasonOf(const VerificationOutcome& outcome) {
  EXPECT_FALSE(outcome.human()) << "unexpected Human";
  return outcome.reason.value_or(RejectionReason::kMalformed);
}

TEST(EngineTest, HonestResponsesGeneralMode) {
  CeremonyHarness h(Mode::kGeneral);
  for (AttestationMode mode :
       {AttestationMode::kPackedSelf, AttestationMode::kPackedX5c, AttestationMode::kNone}) {
    AuthenticatorBehavior b = Honest(mode);
    b.sign_count_start = 7;
    const VerificationOutcome out = h.Verify(h.Respond(b));
    EXPECT_TRUE(out.human()) << out.detail;
    EXPECT_EQ(out.aaguid, kRegisteredAaguid);
    EXPECT_EQ(out.attestation_format, mode == AttestationMode::kNone ? "none" : "packed");
    EXPECT_EQ(out.sign_count, 7u);
  }
}

TEST(EngineTest, StrictModeTrustGate) {
  CeremonyHarness strict(Mode::kStrict);
  const VerificationOutcome ok = strict.Verify(strict.Respond(Honest()));
  EXPECT_TRUE(ok.human()) << ok.detail;
  EXPECT_EQ(ReasonOf(strict.Verify(
                strict.Respond(Honest(AttestationMode::kPackedX5c, kUnregisteredAaguid)))),
            RejectionReason::kUntrustedAuthenticator);
  EXPECT_EQ(ReasonOf(strict.Verify(strict.Respond(Honest(AttestationMode::kPackedSelf)))),
            RejectionReason::kUntrustedAuthenticator);
  EXPECT_EQ(ReasonOf(strict.Verify(strict.Respond(Honest(AttestationMode::kNone)))),
            RejectionReason::kUntrustedAuthenticator);

  CeremonyHarness general(Mode::kGeneral);
  EXPECT_TRUE(general.Verify(general.Respond(Honest())).human());
  EXPECT_TRUE(
      general.Verify(general.Respond(Honest(AttestationMode::kPackedX5c, kUnregisteredAaguid)))
          .human());
}

TEST(EngineTest, AaguidMismatchWithCertificateIsUntrusted) {
  CeremonyHarness strict(Mode::kStrict);
  const IssuedChallenge issued = strict.Issue();
  softauth::SoftAuthenticator authenticator;
  authenticator.set_attestation_identity(
      testing::TrustFixture::Get().IdentityFor(kUnregisteredAaguid));
  // Claims the registered model while holding another model's certificate.
  const AttestationResponse response = authenticator.CreateCredential(
      issued.options, testing::kOrigin, Honest(), issued.record.record_id);
  EXPECT_EQ(ReasonOf(strict.Verify(response)), RejectionReason::kUntrustedAuthenticator);
}

TEST(EngineTest, ReplayIsRejected) {
  for (Mode mode : {Mode::kGeneral, Mode::kStrict}) {
    CeremonyHarness h(mode);
    const AttestationResponse response = h.Respond(Honest());
    EXPECT_TRUE(h.Verify(response).human());
    EXPECT_EQ(ReasonOf(h.Verify(softauth::SoftAuthenticator::ReplayResponse(response))),
              RejectionReason::kChallengeReplayed);
  }
}

TEST(EngineTest, FlagsForcedToZero) {
  for (Mode mode : {Mode::kGeneral, Mode::kStrict}) {
    CeremonyHarness h(mode);
    AuthenticatorBehavior b = Honest();
    b.raw_flags = 0x00;
    EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kMissingUserPresence);
  }
}

TEST(EngineTest, ExhaustiveFlagBytes) {
  for (Mode mode : {Mode::kGeneral, Mode::kStrict}) {
    CeremonyHarness h(mode);
    const uint8_t required = mode == Mode::kStrict ? 0x45 : 0x41;
    for (int raw = 0; raw < 256; ++raw) {
      AuthenticatorBehavior b = Honest();
      b.raw_flags = static_cast<uint8_t>(raw);
      const VerificationOutcome out = h.Verify(h.Respond(b));
      const bool expect_accept = (raw & required) == required;
      EXPECT_EQ(out.human(), expect_accept) << ModeName(mode) << " flags " << raw << " " << out.detail;
      if (!(raw & 0x01)) {
        EXPECT_EQ(out.reason, RejectionReason::kMissingUserPresence) << raw;
      } else if (mode == Mode::kStrict && !(raw & 0x04)) {
        EXPECT_EQ(out.reason, RejectionReason::kMissingUserVerification) << raw;
      } else if (!(raw & 0x40)) {
        EXPECT_EQ(out.reason, RejectionReason::kMalformed) << raw;
      }
    }
  }
}

TEST(EngineTest, UvPolicy) {
  AuthenticatorBehavior no_uv = Honest();
  no_uv.set_uv = false;
  CeremonyHarness general(Mode::kGeneral);
  EXPECT_TRUE(general.Verify(general.Respond(no_uv)).human());
  CeremonyHarness strict(Mode::kStrict);
  EXPECT_EQ(ReasonOf(strict.Verify(strict.Respond(no_uv))),
            RejectionReason::kMissingUserVerification);

  VerificationPolicy policy = VerificationPolicy::ForMode(Mode::kGeneral);
  policy.require_uv = true;
  CeremonyHarness general_uv(Mode::kGeneral, 0, policy);
  EXPECT_EQ(ReasonOf(general_uv.Verify(general_uv.Respond(no_uv))),
            RejectionReason::kMissingUserVerification);
}

TEST(EngineTest, OriginAndChallengeBinding) {
  CeremonyHarness h(Mode::kGeneral);
  AuthenticatorBehavior evil = Honest();
  evil.wrong_origin = "https://evil.example";
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(evil))), RejectionReason::kOriginMismatch);

  AuthenticatorBehavior port = Honest();
  port.wrong_origin = "https://localhost:8443";
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(port))), RejectionReason::kOriginMismatch);

  // A mismatching challenge does not burn the record.
  const IssuedChallenge issued = h.Issue();
  AuthenticatorBehavior wrong = Honest();
  wrong.wrong_challenge = Bytes(32, 0x11);
  EXPECT_EQ(ReasonOf(h.Verify(h.Answer(issued, wrong))), RejectionReason::kChallengeMismatch);
  EXPECT_TRUE(h.Verify(h.Answer(issued, Honest())).human());

  AttestationResponse unknown = h.Respond(Honest());
  unknown.record_id = "no-such-record";
  EXPECT_EQ(ReasonOf(h.Verify(unknown)), RejectionReason::kChallengeMismatch);
}

TEST(EngineTest, RpIdMismatch) {
  CeremonyHarness h(Mode::kGeneral);
  IssuedChallenge issued = h.Issue();
  issued.options.rp_id = "example.com";
  EXPECT_EQ(ReasonOf(h.Verify(h.Answer(issued, Honest()))), RejectionReason::kRpIdMismatch);
}

TEST(EngineTest, CorruptSignature) {
  for (AttestationMode mode : {AttestationMode::kPackedSelf, AttestationMode::kPackedX5c}) {
    CeremonyHarness h(Mode::kGeneral);
    AuthenticatorBehavior b = Honest(mode);
    b.corrupt_signature = true;
    EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kBadSignature);
  }
}

TEST(EngineTest, MalformedInputs) {
  CeremonyHarness h(Mode::kGeneral);
  AttestationResponse r = h.Respond(Honest());
  r.client_data_json = ToBytes("not json");
  EXPECT_EQ(ReasonOf(h.Verify(r)), RejectionReason::kMalformed);

  r = h.Respond(Honest());
  r.attestation_object = Bytes{0xa0};
  EXPECT_EQ(ReasonOf(h.Verify(r)), RejectionReason::kMalformed);
}

// The earliest failing step names the rejection.
TEST(EngineTest, StepOrder) {
  CeremonyHarness h(Mode::kStrict);
  AuthenticatorBehavior b = Honest(AttestationMode::kPackedX5c, kUnregisteredAaguid);
  b.corrupt_signature = true;
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kBadSignature);
  b.set_uv = false;
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kMissingUserVerification);
  b.set_up = false;
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kMissingUserPresence);

  IssuedChallenge issued = h.Issue();
  issued.options.rp_id = "example.com";
  EXPECT_EQ(ReasonOf(h.Verify(h.Answer(issued, b))), RejectionReason::kRpIdMismatch);
  b.wrong_challenge = Bytes(32, 0);
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kChallengeMismatch);
  b.wrong_origin = "https://evil.example";
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(b))), RejectionReason::kOriginMismatch);
}

TEST(EngineTest, ChallengeExpiry) {
  CeremonyHarness h(Mode::kGeneral);
  const Timestamp t0 = Clock::now();
  EXPECT_TRUE(h.Verify(h.Respond(Honest(), t0), t0 + kTtl).human());
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(Honest(), t0), t0 + kTtl + std::chrono::milliseconds(1))),
            RejectionReason::kChallengeExpired);
  // Even a cryptographically perfect response cannot outlive its record.
  EXPECT_EQ(ReasonOf(h.Verify(h.Respond(Honest(), t0), t0 + std::chrono::hours(1))),
            RejectionReason::kChallengeExpired);
}

TEST(EngineTest, SingleUseUnderConcurrency) {
  CeremonyHarness h(Mode::kGeneral);
  for (int round = 0; round < 20; ++round) {
    const AttestationResponse response = h.Respond(Honest(AttestationMode::kPackedSelf));
    std::atomic<int> human{0};
    std::atomic<int> replayed{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&] {
        const VerificationOutcome out = h.Verify(response);
        if (out.human()) ++human;
        if (out.reason == RejectionReason::kChallengeReplayed) ++replayed;
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(human.load(), 1);
    EXPECT_EQ(replayed.load(), 7);
  }
}

// Every response accepted in Strict is accepted in General.
TEST(EngineTest, StrictAcceptanceImpliesGeneral) {
  crypto::SeededRandom pick(77);
  int strict_accepts = 0;
  for (int i = 0; i < 120; ++i) {
    const uint64_t seed = 1000 + i;
    CeremonyHarness strict(Mode::kStrict, seed);
    CeremonyHarness general(Mode::kGeneral, seed);
    const Bytes r = pick.Generate(4);
    AuthenticatorBehavior b = Honest(static_cast<AttestationMode>(r[0] % 3),
                                     r[1] & 1 ? kRegisteredAaguid : kUnregisteredAaguid);
    b.set_uv = r[2] % 4 != 0;
    b.set_up = r[3] % 8 != 0;
    const IssuedChallenge si = strict.Issue();
    const IssuedChallenge gi = general.Issue();
    ASSERT_EQ(si.record.record_id, gi.record.record_id);
    ASSERT_EQ(si.record.challenge, gi.record.challenge);
    const AttestationResponse response = strict.Answer(si, b);
    const bool s = strict.Verify(response).human();
    const bool g = general.Verify(response).human();
    if (s) {
      ++strict_accepts;
      EXPECT_TRUE(g);
    }
  }
  EXPECT_GT(strict_accepts, 0);
}

// Single-bit corruption anywhere in the attestation object of a passing
// response must never pass. "none" is excluded: it carries no signature,
// so nothing binds the credential id or key bytes.
void FuzzBitFlips(Mode mode, AttestationMode attestation, int flips, uint64_t seed) {
  CeremonyHarness h(mode);
  crypto::SeededRandom rng(seed);
  int rejected = 0;
  for (int i = 0; i < flips; ++i) {
    AttestationResponse response = h.Respond(Honest(attestation));
    uint32_t pick = 0;
    for (uint8_t byte : rng.Generate(4)) pick = (pick << 8) | byte;
    const size_t bit = pick % (response.attestation_object.size() * 8);
    response.attestation_object[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    const VerificationOutcome out = h.Verify(response);
    if (!out.human()) {
      ++rejected;
    } else {
      ADD_FAILURE() << "bit " << bit << " flip accepted";
    }
  }
  EXPECT_EQ(rejected, flips);
}

TEST(EngineFuzzTest, PackedSelfGeneralMode) {
  FuzzBitFlips(Mode::kGeneral, AttestationMode::kPackedSelf, 1000, 1);
}

TEST(EngineFuzzTest, PackedX5cStrictMode) {
  FuzzBitFlips(Mode::kStrict, AttestationMode::kPackedX5c, 1000, 2);
}

TEST(EngineTest, IssuedOptions) {
  CeremonyHarness h(Mode::kStrict);
  const IssuedChallenge issued = h.Issue();
  const CreationOptions& o = issued.options;
  EXPECT_EQ(codec::DecodeBase64Url(o.challenge).size(), 32u);
  EXPECT_EQ(o.rp_id, "localhost");
  EXPECT_EQ(o.pub_key_cred_params, (std::vector<int64_t>{-7, -257}));
  EXPECT_EQ(o.user_verification, "required");
  EXPECT_EQ(o.attestation, "direct");
  EXPECT_EQ(o.timeout_ms, 120000u);
  EXPECT_EQ(codec::DecodeBase64Url(o.user_id).size(), 16u);

  const nlohmann::json j = o.ToJson();
  EXPECT_EQ(j["rp"]["id"], "localhost");
  EXPECT_EQ(j["pubKeyCredParams"][0]["type"], "public-key");
  EXPECT_EQ(j["pubKeyCredParams"][0]["alg"], -7);
  EXPECT_EQ(j["authenticatorSelection"]["userVerification"], "required");
  const CreationOptions back = CreationOptions::FromJson(j);
  EXPECT_EQ(back.challenge, o.challenge);
  EXPECT_EQ(back.user_id, o.user_id);
  EXPECT_EQ(back.pub_key_cred_params, o.pub_key_cred_params);
  EXPECT_THROW(CreationOptions::FromJson(nlohmann::json::object()), std::invalid_argument);

  CeremonyHarness a(Mode::kGeneral), b(Mode::kGeneral);
  EXPECT_NE(a.Issue().options.challenge, b.Issue().options.challenge);
}

TEST(EngineTest, UnsupportedOptionWithoutEs256) {
  CeremonyHarness h(Mode::kGeneral);
  IssuedChallenge issued = h.Issue();
  issued.options.pub_key_cred_params = {-257};
  EXPECT_THROW(h.Answer(issued, Honest()), softauth::UnsupportedOption);
}

TEST(EngineTest, StrictRequiresTrustStore) {
  EXPECT_THROW(VerificationEngine(VerificationPolicy::ForMode(Mode::kStrict), nullptr),
               std::invalid_argument);
  VerificationPolicy no_origins;
  no_origins.expected_origins.clear();
  EXPECT_THROW(VerificationEngine(no_origins, nullptr), std::invalid_argument);
}

TEST(ChallengeStoreTest, CapacityAndSweep) {
  crypto::SeededRandom rng(3);
  ChallengeStore store(rng, 3);
  const Timestamp t0 = Clock::now();
  const ChallengeRecord first = store.Issue("localhost", t0, kTtl);
  store.Issue("localhost", t0, kTtl);
  store.Issue("localhost", t0, kTtl);
  EXPECT_THROW(store.Issue("localhost", t0, kTtl), ChallengeStoreFull);
  EXPECT_EQ(store.Sweep(t0 + 2 * kTtl, kTtl), 0u);
  EXPECT_EQ(store.Sweep(t0 + 2 * kTtl + std::chrono::seconds(1), kTtl), 3u);
  EXPECT_EQ(store.size(), 0u);
  EXPECT_FALSE(store.Lookup(first.record_id));
  // Full stores sweep themselves before refusing.
  for (int i = 0; i < 3; ++i) store.Issue("localhost", t0, kTtl);
  EXPECT_NO_THROW(store.Issue("localhost", t0 + std::chrono::hours(1), kTtl));
}

TEST(ChallengeStoreTest, ConsumeOrder) {
  ChallengeStore store;
  const Timestamp t0 = Clock::now();
  const ChallengeRecord rec = store.Issue("localhost", t0, kTtl);
  Challenge other = rec.challenge;
  other[0] ^= 1;
  EXPECT_EQ(store.Consume("missing", rec.challenge, t0, kTtl), ConsumeResult::kUnknownRecord);
  EXPECT_EQ(store.Consume(rec.record_id, other, t0, kTtl), ConsumeResult::kMismatch);
  EXPECT_EQ(store.Consume(rec.record_id, rec.challenge, t0, kTtl), ConsumeResult::kConsumed);
  EXPECT_EQ(store.Consume(rec.record_id, rec.challenge, t0, kTtl), ConsumeResult::kReplayed);
  EXPECT_TRUE(store.Lookup(rec.record_id)->consumed);

  const ChallengeRecord old = store.Issue("localhost", t0, kTtl);
  EXPECT_EQ(store.Consume(old.record_id, old.challenge, t0 + kTtl + std::chrono::seconds(1), kTtl),
            ConsumeResult::kExpired);
}

}  // namespace
}  // namespace cahicha::engine
