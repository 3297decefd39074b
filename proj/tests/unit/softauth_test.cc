#include <fstream>
#include <iterator>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <openssl/x509.h>

#include "cahicha/codec/attestation_object.h"
#include "cahicha/codec/base64.h"
#include "cahicha/codec/client_data.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/x509.h"
#include "cahicha/engine/verification_engine.h"
#include "cahicha/softauth/fixture_pki.h"
#include "cahicha/softauth/soft_authenticator.h"
#include "harness.h"

namespace cahicha::softauth {
namespace {

using testing::kRegisteredAaguid;

engine::CreationOptions Options() {
  engine::CreationOptions o;
  o.challenge = codec::EncodeBase64Url(Bytes(32, 0x5a));
  o.rp_id = "localhost";
  o.rp_name = "CAHICHA";
  o.user_id = codec::EncodeBase64Url(Bytes(16, 1));
  o.user_name = "visitor";
  o.user_display_name = "Visitor";
  o.pub_key_cred_params = {-7};
  o.user_verification = "required";
  o.attestation = "direct";
  o.timeout_ms = 120000;
  return o;
}

nlohmann::json ReadFixture(const std::string& name) {
  std::ifstream in(std::string(CAHICHA_FIXTURE_DIR) + "/" + name);
  EXPECT_TRUE(in.good()) << name;
  return nlohmann::json::parse(in);
}

void CheckGolden(const std::string& file, AttestationMode mode) {
  const nlohmann::json fx = ReadFixture(file);
  const engine::CreationOptions options = engine::CreationOptions::FromJson(fx["options"]);
  AuthenticatorBehavior behavior;
  behavior.attestation = mode;
  behavior.sign_count_start = 1;
  SoftAuthenticator authenticator(fx["seed"].get<uint64_t>());
  const engine::AttestationResponse regenerated = authenticator.CreateCredential(
      options, fx["origin"].get<std::string>(), behavior,
      fx["response"]["record_id"].get<std::string>());
  const engine::AttestationResponse golden = ResponseFromJson(fx["response"]);
  EXPECT_EQ(regenerated.attestation_object, golden.attestation_object);
  EXPECT_EQ(regenerated.client_data_json, golden.client_data_json);

  const codec::AttestationObject obj = codec::DecodeAttestationObject(golden.attestation_object);
  const nlohmann::json& expect = fx["expect"];
  EXPECT_EQ(HexEncode(obj.auth_data.rp_id_hash), expect["rp_id_hash"]);
  EXPECT_EQ(obj.auth_data.flags.raw(), expect["flags"]);
  EXPECT_EQ(obj.auth_data.sign_count, expect["sign_count"]);
  const codec::AttestedCredentialData& cred = *obj.auth_data.attested_credential;
  EXPECT_EQ(HexEncode(cred.credential_id), expect["credential_id"]);
  EXPECT_EQ(HexEncode(cred.public_key.point.x), expect["x"]);
  EXPECT_EQ(HexEncode(cred.public_key.point.y), expect["y"]);
  EXPECT_EQ(HexEncode(obj.statement.signature), expect["signature"]);
}

TEST(GoldenTest, PackedSelf) { CheckGolden("golden_packed_self.json", AttestationMode::kPackedSelf); }

TEST(GoldenTest, None) { CheckGolden("golden_none.json", AttestationMode::kNone); }

TEST(SoftAuthenticatorTest, SeededOutputIsReproducible) {
  for (AttestationMode mode : {AttestationMode::kPackedSelf, AttestationMode::kNone}) {
    AuthenticatorBehavior b;
    b.attestation = mode;
    SoftAuthenticator a(5), c(5), d(6);
    const auto ra = a.CreateCredential(Options(), "https://localhost", b);
    const auto rc = c.CreateCredential(Options(), "https://localhost", b);
    const auto rd = d.CreateCredential(Options(), "https://localhost", b);
    EXPECT_EQ(ra.attestation_object, rc.attestation_object);
    EXPECT_NE(ra.attestation_object, rd.attestation_object);
    // Consecutive credentials from one authenticator differ.
    EXPECT_NE(a.CreateCredential(Options(), "https://localhost", b).attestation_object,
              ra.attestation_object);
  }
}

TEST(SoftAuthenticatorTest, ClientDataFollowsBehavior) {
  SoftAuthenticator authenticator;
  AuthenticatorBehavior b;
  codec::ClientData cd = codec::ParseClientData(
      authenticator.CreateCredential(Options(), "https://localhost", b).client_data_json);
  EXPECT_EQ(cd.ceremony_type, "webauthn.create");
  EXPECT_EQ(cd.challenge, Options().challenge);
  EXPECT_EQ(cd.origin, "https://localhost");

  b.wrong_challenge = Bytes{1, 2, 3};
  b.wrong_origin = "https://evil.example";
  cd = codec::ParseClientData(
      authenticator.CreateCredential(Options(), "https://localhost", b).client_data_json);
  EXPECT_EQ(cd.challenge, "AQID");
  EXPECT_EQ(cd.origin, "https://evil.example");
}

TEST(SoftAuthenticatorTest, AuthenticatorDataFollowsBehavior) {
  SoftAuthenticator authenticator;
  AuthenticatorBehavior b;
  b.set_uv = false;
  b.sign_count_start = 42;
  b.aaguid = kRegisteredAaguid;
  const codec::AttestationObject obj = codec::DecodeAttestationObject(
      authenticator.CreateCredential(Options(), "https://localhost", b).attestation_object);
  EXPECT_EQ(obj.auth_data.flags.raw(), 0x41);
  EXPECT_EQ(obj.auth_data.sign_count, 42u);
  EXPECT_EQ(obj.auth_data.attested_credential->aaguid, kRegisteredAaguid);
  EXPECT_EQ(obj.auth_data.rp_id_hash, crypto::Sha256(AsBytes("localhost")));
}

TEST(SoftAuthenticatorTest, CorruptSignatureFlipsOneBit) {
  AuthenticatorBehavior b;
  SoftAuthenticator honest(9), corrupt(9);
  const auto good = codec::DecodeAttestationObject(
      honest.CreateCredential(Options(), "https://localhost", b).attestation_object);
  b.corrupt_signature = true;
  const auto bad = codec::DecodeAttestationObject(
      corrupt.CreateCredential(Options(), "https://localhost", b).attestation_object);
  ASSERT_EQ(good.statement.signature.size(), bad.statement.signature.size());
  int differing_bits = 0;
  for (size_t i = 0; i < good.statement.signature.size(); ++i)
    differing_bits += __builtin_popcount(good.statement.signature[i] ^ bad.statement.signature[i]);
  EXPECT_EQ(differing_bits, 1);
}

TEST(SoftAuthenticatorTest, SignatureVerifiesOverAuthDataAndClientDataHash) {
  SoftAuthenticator authenticator;
  const engine::AttestationResponse r =
      authenticator.CreateCredential(Options(), "https://localhost", AuthenticatorBehavior{});
  const codec::AttestationObject obj = codec::DecodeAttestationObject(r.attestation_object);
  const Sha256Digest cdh = crypto::Sha256(r.client_data_json);
  const codec::CosePublicKey& key = obj.auth_data.attested_credential->public_key;
  EXPECT_TRUE(engine::VerifySignature(obj.auth_data_bytes, cdh, obj.statement.signature, key));

  Bytes flipped = obj.auth_data_bytes;
  flipped[40] ^= 0x10;
  EXPECT_FALSE(engine::VerifySignature(flipped, cdh, obj.statement.signature, key));

  crypto::EvpPkeyPtr other = crypto::GenerateP256Key(crypto::DefaultRandom());
  EXPECT_FALSE(engine::VerifySignature(obj.auth_data_bytes, cdh, obj.statement.signature,
                                       codec::CosePublicKey::FromP256(crypto::P256PointOf(other.get()))));
}

TEST(SoftAuthenticatorTest, PackedX5cCarriesMatchingAttestationCertificate) {
  const auto& fixture = testing::TrustFixture::Get();
  SoftAuthenticator authenticator;
  authenticator.set_attestation_identity(fixture.IdentityFor(kRegisteredAaguid));
  AuthenticatorBehavior b;
  b.attestation = AttestationMode::kPackedX5c;
  b.aaguid = kRegisteredAaguid;
  const engine::AttestationResponse r =
      authenticator.CreateCredential(Options(), "https://localhost", b);
  const codec::AttestationObject obj = codec::DecodeAttestationObject(r.attestation_object);
  ASSERT_EQ(obj.statement.x5c.size(), 1u);
  crypto::X509Ptr leaf = crypto::ParseCertificateDer(obj.statement.x5c[0]);
  ASSERT_TRUE(leaf);
  EXPECT_EQ(crypto::CertificateAaguid(leaf.get()), kRegisteredAaguid);

  char ou[128] = {};
  X509_NAME_get_text_by_NID(X509_get_subject_name(leaf.get()), NID_organizationalUnitName, ou,
                            sizeof(ou));
  EXPECT_STREQ(ou, "Authenticator Attestation");
  EXPECT_EQ(X509_check_ca(leaf.get()), 0);

  crypto::EvpPkeyPtr leaf_key = crypto::CertificatePublicKey(leaf.get());
  Bytes signed_data = obj.auth_data_bytes;
  const Sha256Digest cdh = crypto::Sha256(r.client_data_json);
  signed_data.insert(signed_data.end(), cdh.begin(), cdh.end());
  EXPECT_TRUE(crypto::VerifyEs256(leaf_key.get(), signed_data, obj.statement.signature));
}

TEST(SoftAuthenticatorTest, UnsupportedOptions) {
  SoftAuthenticator authenticator;
  engine::CreationOptions rsa_only = Options();
  rsa_only.pub_key_cred_params = {-257};
  EXPECT_THROW(authenticator.CreateCredential(rsa_only, "https://localhost", {}), UnsupportedOption);
  AuthenticatorBehavior x5c;
  x5c.attestation = AttestationMode::kPackedX5c;
  EXPECT_THROW(authenticator.CreateCredential(Options(), "https://localhost", x5c),
               UnsupportedOption);
}

TEST(SoftAuthenticatorTest, ReplayIsByteIdentical) {
  SoftAuthenticator authenticator;
  const auto r = authenticator.CreateCredential(Options(), "https://localhost", {}, "rec");
  const auto again = SoftAuthenticator::ReplayResponse(r);
  EXPECT_EQ(again.record_id, r.record_id);
  EXPECT_EQ(again.attestation_object, r.attestation_object);
  EXPECT_EQ(again.client_data_json, r.client_data_json);
}

TEST(SoftAuthenticatorTest, JsonRoundTrip) {
  SoftAuthenticator authenticator;
  const auto r = authenticator.CreateCredential(Options(), "https://localhost", {}, "rec");
  const nlohmann::json j = ResponseToJson(r, "/account");
  EXPECT_EQ(j["redirect_to"], "/account");
  const auto back = ResponseFromJson(j);
  EXPECT_EQ(back.record_id, "rec");
  EXPECT_EQ(back.attestation_object, r.attestation_object);
  EXPECT_EQ(back.client_data_json, r.client_data_json);
}

TEST(FixturePkiTest, IdentityPemRoundTrip) {
  const auto& fixture = testing::TrustFixture::Get();
  const auto identity = fixture.IdentityFor(kRegisteredAaguid);
  const AttestationIdentity loaded = LoadAttestationIdentity(
      PrivateKeyPem(identity->key.get()), AttestationChainPem(*identity));
  EXPECT_EQ(loaded.x5c, identity->x5c);
  const Bytes sig = crypto::SignEs256(loaded.key.get(), AsBytes("m"));
  EXPECT_TRUE(crypto::VerifyEs256(identity->key.get(), AsBytes("m"), sig));
  EXPECT_THROW(LoadAttestationIdentity("junk", "junk"), std::runtime_error);
}

TEST(FixturePkiTest, TlsCertificateCoversLocalhost) {
  const KeyAndCertificate tls = MakeLocalhostTlsCertificate();
  EXPECT_EQ(X509_check_host(tls.cert.get(), "localhost", 0, 0, nullptr), 1);
  EXPECT_EQ(X509_check_ip_asc(tls.cert.get(), "127.0.0.1", 0), 1);
  EXPECT_EQ(X509_check_private_key(tls.cert.get(), tls.key.get()), 1);
}

}  // namespace
}  // namespace cahicha::softauth
