#include <chrono>
#include <string>

#include <gtest/gtest.h>
#include <openssl/x509v3.h>

#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/errors.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/random.h"
#include "cahicha/crypto/x509.h"

namespace cahicha::crypto {
namespace {

TEST(Sha256Test, KnownDigests) {
  EXPECT_EQ(HexEncode(Sha256({})),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(HexEncode(Sha256(AsBytes("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(HexEncode(Sha256(AsBytes("localhost"))),
            "49960de5880e8c687434170f6476605b8fe4aeb9a28632c7995cf3ba831d9763");
}

TEST(Sha256Test, Deterministic) {
  const Bytes data = SecureRandom().Generate(100);
  EXPECT_EQ(Sha256(data), Sha256(data));
}

TEST(HmacTest, Rfc4231Case2) {
  EXPECT_EQ(HexEncode(HmacSha256(AsBytes("Jefe"), AsBytes("what do ya want for nothing?"))),
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(ConstantTimeEqualsTest, ComparesContentAndLength) {
  const Bytes a = {1, 2, 3};
  EXPECT_TRUE(ConstantTimeEquals(a, Bytes{1, 2, 3}));
  EXPECT_FALSE(ConstantTimeEquals(a, Bytes{1, 2, 4}));
  EXPECT_FALSE(ConstantTimeEquals(a, Bytes{1, 2}));
}

TEST(SeededRandomTest, MatchesHmacCounterConstruction) {
  SeededRandom rng(42);
  EXPECT_EQ(HexEncode(rng.Generate(40)),
            "ff70a12df93c24ab4936f07e0765a4f98e2dd3cc3857b029502222ba083ac70b4302dab28b8edd3d");
}

TEST(SeededRandomTest, SameSeedSameStream) {
  SeededRandom a(7), b(7), c(8);
  const Bytes x = a.Generate(64);
  EXPECT_EQ(x, b.Generate(64));
  EXPECT_NE(x, c.Generate(64));
}

TEST(SecureRandomTest, ProducesDistinctOutput) {
  SecureRandom rng;
  EXPECT_NE(rng.Generate(32), rng.Generate(32));
}

TEST(Es256Test, SignVerifyRoundTrip) {
  EvpPkeyPtr key = GenerateP256Key(DefaultRandom());
  ASSERT_TRUE(IsP256Key(key.get()));
  const Bytes msg = ToBytes("attestation");
  const Bytes sig = SignEs256(key.get(), msg);
  EXPECT_GE(sig.size(), 8u);
  EXPECT_LE(sig.size(), 72u);
  EXPECT_TRUE(VerifyEs256(key.get(), msg, sig));

  Bytes tampered = msg;
  tampered[0] ^= 1;
  EXPECT_FALSE(VerifyEs256(key.get(), tampered, sig));

  EvpPkeyPtr other = GenerateP256Key(DefaultRandom());
  EXPECT_FALSE(VerifyEs256(other.get(), msg, sig));
}

TEST(Es256Test, SignatureIsDeterministic) {
  SeededRandom rng(1);
  EvpPkeyPtr key = GenerateP256Key(rng);
  EXPECT_EQ(SignEs256(key.get(), AsBytes("x")), SignEs256(key.get(), AsBytes("x")));
  EXPECT_NE(SignEs256(key.get(), AsBytes("x")), SignEs256(key.get(), AsBytes("y")));
}

TEST(Es256Test, SeededKeysAreReproducible) {
  SeededRandom a(99), b(99);
  EXPECT_EQ(P256PointOf(GenerateP256Key(a).get()), P256PointOf(GenerateP256Key(b).get()));
}

TEST(Es256Test, RawDerConversionRoundTrips) {
  EvpPkeyPtr key = GenerateP256Key(DefaultRandom());
  for (int i = 0; i < 50; ++i) {
    const Bytes der = SignEs256(key.get(), AsBytes(std::to_string(i)));
    const Bytes raw = EcdsaDerToRaw(der);
    ASSERT_EQ(raw.size(), 64u);
    EXPECT_EQ(EcdsaRawToDer(raw), der);
  }
}

TEST(Es256Test, PointRoundTripAndOffCurveRejection) {
  EvpPkeyPtr key = GenerateP256Key(DefaultRandom());
  P256PublicPoint point = P256PointOf(key.get());
  EvpPkeyPtr rebuilt = P256KeyFromPoint(point);
  ASSERT_TRUE(rebuilt);
  const Bytes sig = SignEs256(key.get(), AsBytes("m"));
  EXPECT_TRUE(VerifyEs256(rebuilt.get(), AsBytes("m"), sig));

  point.y[31] ^= 1;
  EXPECT_EQ(P256KeyFromPoint(point), nullptr);
}

TEST(Rs256Test, SignVerifyRoundTrip) {
  EvpPkeyPtr key = GenerateRsaKey(2048);
  ASSERT_TRUE(IsRsaKey(key.get()));
  const Bytes sig = SignRs256(key.get(), AsBytes("m"));
  EXPECT_EQ(sig.size(), 256u);
  EXPECT_TRUE(VerifyRs256(key.get(), AsBytes("m"), sig));
  EXPECT_FALSE(VerifyRs256(key.get(), AsBytes("n"), sig));
  EXPECT_FALSE(VerifyEs256(key.get(), AsBytes("m"), sig));
}

TEST(X509Test, RejectsGarbageAndTrailingBytes) {
  EXPECT_EQ(ParseCertificateDer({}), nullptr);
  EXPECT_EQ(ParseCertificateDer(AsBytes("not a certificate")), nullptr);
}

}  // namespace
}  // namespace cahicha::crypto
