#include <chrono>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <sys/stat.h>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/random.h"
#include "cahicha/token/cookie.h"
#include "cahicha/token/session_token.h"

namespace cahicha::token {
namespace {

using std::chrono::hours;
using std::chrono::milliseconds;
using std::chrono::seconds;

Timestamp At(int64_t ms) { return Timestamp(milliseconds(ms)); }

TokenKey SequentialKey() {
  Bytes raw(32);
  for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<uint8_t>(i);
  return TokenKey(raw);
}

TEST(FernetTest, ReferenceVector) {
  const TokenKey key(codec::DecodeBase64Url("cw_0x689RpI-jtRR7oE8h_eQsKImvJapLeSbXpwF4e4="));
  Bytes iv(16);
  for (size_t i = 0; i < iv.size(); ++i) iv[i] = static_cast<uint8_t>(i);
  const std::string expected =
      "gAAAAAAdwJ6wAAECAwQFBgcICQoLDA0ODy021cpGVWKZ_eEwCGM4BLLF_5CV9dOPmrhuVUPgJobwOz7JcbmrR64jVmpU"
      "4IwqDA==";
  EXPECT_EQ(SealFernet(key, AsBytes("hello"), 499162800, iv), expected);

  const OpenedFernet opened = OpenFernet(key, expected);
  ASSERT_TRUE(opened.plaintext);
  EXPECT_EQ(ToString(*opened.plaintext), "hello");
  EXPECT_EQ(opened.timestamp_seconds, 499162800u);
}

TEST(FernetTest, CahichaPayloadVector) {
  const std::string expected =
      "gAAAAABlU_EApaWlpaWlpaWlpaWlpaWlpZvVKNwDrKMkPyBXbXv-Rvz2xfKnsBpICD2OBpGJ-6CX_-4zq0HgbxdldEuY"
      "FshKryUXtz50D24WQ502PQuWJFw=";
  EXPECT_EQ(SealFernet(SequentialKey(), AsBytes("CAHICHA-OK-1|1700000000123"), 1700000000,
                       Bytes(16, 0xa5)),
            expected);
  const TokenValidation v = ValidateToken(SequentialKey(), expected, At(1700000000123));
  EXPECT_TRUE(v.valid);
  EXPECT_EQ(v.age, milliseconds(0));
}

TEST(FernetTest, ContainerLayout) {
  const std::string token = MintToken(SequentialKey(), At(1700000000999));
  const Bytes raw = codec::DecodeBase64Url(token);
  // version, timestamp, IV, one AES block for a 26-byte payload padded to 32, HMAC.
  ASSERT_EQ(raw.size(), 1u + 8 + 16 + 32 + 32);
  EXPECT_EQ(raw[0], 0x80);
  uint64_t ts = 0;
  for (int i = 1; i <= 8; ++i) ts = (ts << 8) | raw[i];
  EXPECT_EQ(ts, 1700000000u);
  EXPECT_EQ(token.find("CAHICHA"), std::string::npos);
  EXPECT_EQ(ToString(raw).find("CAHICHA"), std::string::npos);
}

TEST(PayloadTest, SerializeParseInverse) {
  const TokenPayload p{kMagic, 1700000000123};
  EXPECT_EQ(p.Serialize(), "CAHICHA-OK-1|1700000000123");
  const auto parsed = TokenPayload::Parse(p.Serialize());
  ASSERT_TRUE(parsed);
  EXPECT_EQ(parsed->magic, kMagic);
  EXPECT_EQ(parsed->minted_at_ms, 1700000000123u);
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1|"));
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1|01"));
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1|12a"));
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1|+12"));
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1"));
  EXPECT_FALSE(TokenPayload::Parse("CAHICHA-OK-1|99999999999999999999999"));
}

TEST(TokenTest, RoundTripAtSameInstant) {
  const TokenKey key = TokenKey::Generate();
  for (int64_t ms : {int64_t{0}, int64_t{1}, int64_t{1700000000123}, int64_t{4102444800000}}) {
    const TokenValidation v = ValidateToken(key, MintToken(key, At(ms)), At(ms));
    EXPECT_TRUE(v.valid) << ms;
    EXPECT_EQ(v.age, milliseconds(0));
  }
}

TEST(TokenTest, DistinctTokensSameInstant) {
  const TokenKey key = TokenKey::Generate();
  const std::string a = MintToken(key, At(1000));
  const std::string b = MintToken(key, At(1000));
  EXPECT_NE(a, b);
  EXPECT_TRUE(ValidateToken(key, a, At(1000)));
  EXPECT_TRUE(ValidateToken(key, b, At(1000)));
}

TEST(TokenTest, WrongKeyIsIntegrityFailure) {
  const std::string token = MintToken(TokenKey::Generate(), At(1000));
  const TokenValidation v = ValidateToken(TokenKey::Generate(), token, At(1000));
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.reason, InvalidReason::kIntegrityFailure);
}

TEST(TokenTest, TwentyFourHourBoundary) {
  const TokenKey key = TokenKey::Generate();
  const int64_t minted = 1700000000123;
  const std::string token = MintToken(key, At(minted));
  const int64_t day = 24LL * 3600 * 1000;

  const TokenValidation exact = ValidateToken(key, token, At(minted + day));
  EXPECT_TRUE(exact.valid);
  EXPECT_EQ(exact.age, milliseconds(day));
  EXPECT_TRUE(ValidateToken(key, token, At(minted + day - 1)));

  const TokenValidation over = ValidateToken(key, token, At(minted + day + 1));
  EXPECT_FALSE(over.valid);
  EXPECT_EQ(over.reason, InvalidReason::kExpired);
}

TEST(TokenTest, ExpiryIsMonotone) {
  const TokenKey key = TokenKey::Generate();
  const std::string token = MintToken(key, At(0));
  const int64_t day = 24LL * 3600 * 1000;
  for (int64_t later : {day + 1, day + 2, 2 * day, 365 * day}) {
    EXPECT_EQ(ValidateToken(key, token, At(later)).reason, InvalidReason::kExpired);
  }
}

TEST(TokenTest, CustomMaxAge) {
  const TokenKey key = TokenKey::Generate();
  const std::string token = MintToken(key, At(0));
  EXPECT_TRUE(ValidateToken(key, token, At(3600000), hours(1)));
  EXPECT_FALSE(ValidateToken(key, token, At(3600001), hours(1)));
}

TEST(TokenTest, FutureMintBeyondSkewAllowance) {
  const TokenKey key = TokenKey::Generate();
  const std::string token = MintToken(key, At(100000000));
  EXPECT_TRUE(ValidateToken(key, token, At(100000000 - 60000)));
  const TokenValidation v = ValidateToken(key, token, At(100000000 - 60001));
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.reason, InvalidReason::kClockSkew);
}

TEST(TokenTest, BadMagic) {
  const TokenKey key = SequentialKey();
  for (const char* payload : {"CAHICHA-OK-2|1000", "cahicha-ok-1|1000", "CAHICHA-OK-1 |1000",
                              "hello", ""}) {
    const std::string token = SealFernet(key, AsBytes(payload), 1, Bytes(16, 7));
    const TokenValidation v = ValidateToken(key, token, At(1000));
    EXPECT_FALSE(v.valid);
    EXPECT_EQ(v.reason, InvalidReason::kBadMagic) << payload;
  }
}

TEST(TokenTest, MalformedContainers) {
  const TokenKey key = SequentialKey();
  for (const char* text : {"", "!!!", "gAAAAA", "AAAA"}) {
    const TokenValidation v = ValidateToken(key, text, At(0));
    EXPECT_FALSE(v.valid);
    EXPECT_EQ(v.reason, InvalidReason::kMalformedContainer) << text;
  }
  // Correct HMAC over a ciphertext that is not a whole number of blocks.
  Bytes raw = codec::DecodeBase64Url(MintToken(key, At(0)));
  raw.erase(raw.end() - 33);
  EXPECT_FALSE(ValidateToken(key, codec::EncodeBase64Url(raw, codec::Padding::kInclude), At(0)));
}

TEST(TokenTest, EveryContainerBitFlipIsInvalid) {
  const TokenKey key = TokenKey::Generate();
  const std::string token = MintToken(key, At(5000));
  const Bytes raw = codec::DecodeBase64Url(token);
  for (size_t bit = 0; bit < raw.size() * 8; ++bit) {
    Bytes flipped = raw;
    flipped[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    const TokenValidation v =
        ValidateToken(key, codec::EncodeBase64Url(flipped, codec::Padding::kInclude), At(5000));
    EXPECT_FALSE(v.valid) << "bit " << bit;
    if (bit >= 8) {
      EXPECT_EQ(v.reason, InvalidReason::kIntegrityFailure) << "bit " << bit;
    }
  }
}

TEST(TokenTest, EveryTextBitFlipIsInvalid) {
  const TokenKey key = TokenKey::Generate();
  const std::string token = MintToken(key, At(5000));
  for (size_t bit = 0; bit < token.size() * 8; ++bit) {
    std::string flipped = token;
    flipped[bit / 8] = static_cast<char>(flipped[bit / 8] ^ (1u << (bit % 8)));
    EXPECT_FALSE(ValidateToken(key, flipped, At(5000)).valid) << "bit " << bit;
  }
}

TEST(TokenKeyTest, RejectsWrongSize) {
  EXPECT_THROW(TokenKey(Bytes(31)), std::invalid_argument);
  EXPECT_THROW(TokenKey(Bytes(33)), std::invalid_argument);
}

TEST(TokenKeyTest, SplitsSigningAndEncryptionHalves) {
  const TokenKey key = SequentialKey();
  EXPECT_EQ(key.signing_key()[0], 0);
  EXPECT_EQ(key.encryption_key()[0], 16);
}

TEST(TokenKeyTest, LoadOrCreatePersistsWithRestrictedMode) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("cahicha-key-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto path = dir / "token.key";
  std::filesystem::remove(path);

  const TokenKey first = TokenKey::LoadOrCreate(path);
  struct stat st {};
  ASSERT_EQ(::stat(path.c_str(), &st), 0);
  EXPECT_EQ(st.st_mode & 0777, 0600);
  EXPECT_EQ(std::filesystem::file_size(path), 32u);

  const TokenKey second = TokenKey::LoadOrCreate(path);
  EXPECT_TRUE(std::equal(first.raw().begin(), first.raw().end(), second.raw().begin()));

  std::ofstream(path, std::ios::trunc) << "short";
  EXPECT_THROW(TokenKey::LoadOrCreate(path), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(CookieTest, DefaultAttributes) {
  EXPECT_EQ(BuildCookie("abc", {}),
            "cahicha_token=abc; Path=/; Max-Age=86400; HttpOnly; Secure; SameSite=Lax");
}

TEST(CookieTest, CustomName) {
  CookieSettings settings;
  settings.name = "gate";
  settings.max_age = hours(2);
  EXPECT_EQ(BuildCookie("t", settings), "gate=t; Path=/; Max-Age=7200; HttpOnly; Secure; SameSite=Lax");
}

TEST(CookieTest, TokensNeedNoEscaping) {
  const TokenKey key = TokenKey::Generate();
  for (int i = 0; i < 100; ++i) {
    const std::string token = MintToken(key, At(i));
    EXPECT_EQ(token.find_first_of(" ;,\"\\"), std::string::npos);
    EXPECT_EQ(FindCookie("a=b; " + BuildCookie(token, {}).substr(0, BuildCookie(token, {}).find(';')),
                         kDefaultCookieName),
              token);
  }
}

TEST(CookieTest, FindAndRemove) {
  const std::string header = "a=1; cahicha_token=tok; b=\"2\"; cahicha_token=other";
  EXPECT_EQ(FindCookie(header, "cahicha_token"), "tok");
  EXPECT_EQ(FindCookie(header, "b"), "2");
  EXPECT_EQ(FindCookie(header, "c"), std::nullopt);
  EXPECT_EQ(FindCookie("xcahicha_token=1", "cahicha_token"), std::nullopt);
  EXPECT_EQ(RemoveCookie(header, "cahicha_token"), "a=1; b=\"2\"");
  EXPECT_EQ(RemoveCookie("cahicha_token=x", "cahicha_token"), "");
}

}  // namespace
}  // namespace cahicha::token
