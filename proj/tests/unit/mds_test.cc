#include <chrono>
#include <string>

#include <gtest/gtest.h>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/mds/trust_store.h"
#include "cahicha/softauth/fixture_pki.h"

namespace cahicha::mds {
namespace {

using softauth::FixtureAuthority;
using softauth::MdsBlobSpec;

constexpr Aaguid kFirst = {0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08,
                           0x09, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f, 0x10};
constexpr Aaguid kSecond = {0xee, 0xee, 0xee, 0xee, 0xee, 0xee, 0xee, 0xee,
                            0xee, 0xee, 0xee, 0xee, 0xee, 0xee, 0xee, 0x01};
constexpr Aaguid kUnregistered = {0x99};

MdsErrc LoadError(std::string_view blob, ByteView root, const LoadOptions& options = {}) {
  try {
    LoadMdsBlob(blob, root, options);
  } catch (const MdsError& e) {
    return e.code();
  }
  ADD_FAILURE() << "blob loaded";
  return MdsErrc::kMalformedBlob;
}

class MdsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { authority_ = new FixtureAuthority(); }
  static void TearDownTestSuite() { delete authority_; }

  static const FixtureAuthority& authority() { return *authority_; }
  static Bytes root() { return authority_->mds_root().der(); }

  static FixtureAuthority* authority_;
};
FixtureAuthority* MdsTest::authority_ = nullptr;

TEST_F(MdsTest, LoadsTwoEntries) {
  const std::string blob = authority().MdsBlobFor({kFirst, kSecond});
  const LoadResult result = LoadMdsBlob(blob, root());
  EXPECT_TRUE(result.warnings.empty());
  const TrustStore& store = result.store;
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.source_digest(), crypto::Sha256(AsBytes(blob)));
  EXPECT_EQ(store.serial(), 1);
  const MetadataEntry* entry = store.Find(kFirst);
  ASSERT_NE(entry, nullptr);
  EXPECT_EQ(entry->status, AuthenticatorStatus::kCertified);
  EXPECT_EQ(entry->status_name, "FIDO_CERTIFIED_L1");
  ASSERT_EQ(entry->attestation_root_certificates.size(), 1u);
  EXPECT_EQ(entry->attestation_root_certificates[0], authority().attestation_root().der());
  EXPECT_EQ(store.Find(kUnregistered), nullptr);
}

TEST_F(MdsTest, AcceptsPemRoot) {
  const std::string pem = authority().mds_root().pem();
  EXPECT_EQ(LoadMdsBlob(authority().MdsBlobFor({kFirst}), AsBytes(pem)).store.size(), 1u);
}

TEST_F(MdsTest, EmptyEntriesGiveVacuousStore) {
  const LoadResult result = LoadMdsBlob(authority().MdsBlob(MdsBlobSpec{}), root());
  EXPECT_TRUE(result.store.empty());
  const auto leaf = authority().IssueAttestationIdentity(kFirst);
  EXPECT_FALSE(ValidateAttestationChain(leaf.x5c, kFirst, result.store,
                                        std::chrono::system_clock::now()));
}

TEST_F(MdsTest, FlippedSignatureByte) {
  const std::string blob = authority().MdsBlobFor({kFirst, kSecond});
  const size_t dot = blob.rfind('.');
  Bytes sig = codec::DecodeBase64Url(blob.substr(dot + 1));
  sig.back() ^= 0x01;
  const std::string tampered = blob.substr(0, dot + 1) + codec::EncodeBase64Url(sig);
  EXPECT_EQ(LoadError(tampered, root()), MdsErrc::kBadBlobSignature);
}

TEST_F(MdsTest, SwappedPayload) {
  const std::string a = authority().MdsBlobFor({kFirst});
  const std::string b = authority().MdsBlobFor({kFirst, kSecond});
  const std::string spliced = a.substr(0, a.find('.')) + b.substr(b.find('.'), b.rfind('.') - b.find('.')) +
                              a.substr(a.rfind('.'));
  EXPECT_EQ(LoadError(spliced, root()), MdsErrc::kBadBlobSignature);
}

TEST_F(MdsTest, SignedUnderAnotherRoot) {
  FixtureAuthority other;
  EXPECT_EQ(LoadError(other.MdsBlobFor({kFirst}), root()), MdsErrc::kBadBlobSignature);
  // The attestation root is not the metadata root either.
  EXPECT_EQ(LoadError(authority().MdsBlobFor({kFirst}), authority().attestation_root().der()),
            MdsErrc::kBadBlobSignature);
}

TEST_F(MdsTest, MalformedBlobs) {
  const std::string blob = authority().MdsBlobFor({kFirst});
  EXPECT_EQ(LoadError("", root()), MdsErrc::kMalformedBlob);
  EXPECT_EQ(LoadError("a.b", root()), MdsErrc::kMalformedBlob);
  EXPECT_EQ(LoadError(blob + ".x", root()), MdsErrc::kMalformedBlob);
  EXPECT_EQ(LoadError("e30." + blob.substr(blob.find('.') + 1), root()), MdsErrc::kMalformedBlob);
  const std::string alg_none = codec::EncodeBase64Url(AsBytes(R"({"alg":"none"})"));
  EXPECT_EQ(LoadError(alg_none + blob.substr(blob.find('.')), root()), MdsErrc::kMalformedBlob);
  EXPECT_EQ(LoadError(blob, AsBytes("not a cert")), MdsErrc::kMalformedBlob);
}

TEST_F(MdsTest, ExpiredBlobWarnsByDefaultAndRejectsOnRequest) {
  MdsBlobSpec spec;
  spec.next_update = "2000-01-01";
  const std::string blob = authority().MdsBlob(spec);
  const LoadResult warned = LoadMdsBlob(blob, root());
  EXPECT_EQ(warned.warnings.size(), 1u);

  LoadOptions reject;
  reject.expired_blob = ExpiredBlobPolicy::kReject;
  EXPECT_EQ(LoadError(blob, root(), reject), MdsErrc::kExpiredBlob);

  spec.next_update = "2099-12-31";
  EXPECT_NO_THROW(LoadMdsBlob(authority().MdsBlob(spec), root(), reject));
}

TEST_F(MdsTest, StatusMapping) {
  const std::pair<const char*, AuthenticatorStatus> cases[] = {
      {"FIDO_CERTIFIED", AuthenticatorStatus::kCertified},
      {"FIDO_CERTIFIED_L2", AuthenticatorStatus::kCertified},
      {"REVOKED", AuthenticatorStatus::kRevoked},
      {"ATTESTATION_KEY_COMPROMISE", AuthenticatorStatus::kRevoked},
      {"USER_KEY_REMOTE_COMPROMISE", AuthenticatorStatus::kRevoked},
      {"NOT_FIDO_CERTIFIED", AuthenticatorStatus::kOther},
      {"UPDATE_AVAILABLE", AuthenticatorStatus::kOther},
  };
  for (const auto& [name, status] : cases) {
    const TrustStore store = LoadMdsBlob(authority().MdsBlobFor({kFirst}, name), root()).store;
    EXPECT_EQ(store.Find(kFirst)->status, status) << name;
  }
}

TEST_F(MdsTest, ChainFromRegisteredRootValidates) {
  const TrustStore store = LoadMdsBlob(authority().MdsBlobFor({kFirst, kSecond}), root()).store;
  const auto identity = authority().IssueAttestationIdentity(kFirst);
  const auto now = std::chrono::system_clock::now();
  const ChainValidation ok = ValidateAttestationChain(identity.x5c, kFirst, store, now);
  EXPECT_TRUE(ok.trusted) << ok.reason;
  // Deterministic for identical inputs.
  for (int i = 0; i < 5; ++i)
    EXPECT_TRUE(ValidateAttestationChain(identity.x5c, kFirst, store, now));
}

TEST_F(MdsTest, ChainRejections) {
  const auto now = std::chrono::system_clock::now();
  const TrustStore store = LoadMdsBlob(authority().MdsBlobFor({kFirst, kSecond}), root()).store;
  const auto identity = authority().IssueAttestationIdentity(kFirst);

  EXPECT_FALSE(ValidateAttestationChain(identity.x5c, kUnregistered, store, now));
  // Leaf's AAGUID extension names a different registered model.
  EXPECT_FALSE(ValidateAttestationChain(identity.x5c, kSecond, store, now));
  EXPECT_FALSE(ValidateAttestationChain({}, kFirst, store, now));
  EXPECT_FALSE(ValidateAttestationChain(std::vector<Bytes>{Bytes{1, 2, 3}}, kFirst, store, now));
  // Outside the leaf's validity window.
  EXPECT_FALSE(ValidateAttestationChain(identity.x5c, kFirst, store,
                                        now + std::chrono::hours(24 * 365 * 20)));

  FixtureAuthority other;
  const auto foreign = other.IssueAttestationIdentity(kFirst);
  EXPECT_FALSE(ValidateAttestationChain(foreign.x5c, kFirst, store, now));

  const TrustStore revoked =
      LoadMdsBlob(authority().MdsBlobFor({kFirst}, "REVOKED"), root()).store;
  const ChainValidation r = ValidateAttestationChain(identity.x5c, kFirst, revoked, now);
  EXPECT_FALSE(r.trusted);
  EXPECT_FALSE(r.reason.empty());
}

TEST_F(MdsTest, HandleSwapsWholeStore) {
  TrustStoreHandle handle;
  EXPECT_EQ(handle.Get(), nullptr);
  handle.Replace(LoadMdsBlob(authority().MdsBlobFor({kFirst}), root()).store);
  const auto first = handle.Get();
  handle.Replace(LoadMdsBlob(authority().MdsBlobFor({kFirst, kSecond}), root()).store);
  EXPECT_EQ(first->size(), 1u);
  EXPECT_EQ(handle.Get()->size(), 2u);
}

TEST(AaguidTest, FormatParseRoundTrip) {
  const std::string text = FormatAaguid(kFirst);
  EXPECT_EQ(text, "01020304-0506-0708-090a-0b0c0d0e0f10");
  EXPECT_EQ(ParseAaguid(text), kFirst);
  EXPECT_EQ(ParseAaguid("01020304-0506-0708-090A-0B0C0D0E0F10"), kFirst);
  EXPECT_FALSE(ParseAaguid("0102030405060708090a0b0c0d0e0f10"));
  EXPECT_FALSE(ParseAaguid("01020304-0506-0708-090a-0b0c0d0e0f1g"));
}

}  // namespace
}  // namespace cahicha::mds
