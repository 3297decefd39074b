#include <gtest/gtest.h>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/random.h"
#include "test_support.h"

namespace cahicha::codec {
namespace {

TEST(Base64UrlTest, Examples) {
  EXPECT_TRUE(DecodeBase64Url("").empty());
  EXPECT_EQ(DecodeBase64Url("AQ"), Bytes{0x01});
  EXPECT_EQ(DecodeBase64Url("AQ=="), Bytes{0x01});
  EXPECT_EQ(EncodeBase64Url(Bytes{0x01}), "AQ");
  EXPECT_EQ(EncodeBase64Url(Bytes{0x01}, Padding::kInclude), "AQ==");
  EXPECT_EQ(EncodeBase64Url(Bytes{0xfb, 0xff}), "-_8");
  EXPECT_EQ(EncodeBase64(Bytes{0xfb, 0xff}), "+/8=");
  EXPECT_EQ(EncodeBase64Url(ToBytes("foobar")), "Zm9vYmFy");
}

TEST(Base64UrlTest, RejectsOutsideAlphabet) {
  EXPECT_CODEC_ERROR(DecodeBase64Url("+/8"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("AQ!"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("A Q"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64("-_8="), kMalformedEncoding);
}

TEST(Base64UrlTest, RejectsImpossibleLengthsAndStrayBits) {
  EXPECT_CODEC_ERROR(DecodeBase64Url("A"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("AAAAA"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("AR"), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("AQ="), kMalformedEncoding);
  EXPECT_CODEC_ERROR(DecodeBase64Url("A=Q="), kMalformedEncoding);
}

TEST(Base64UrlTest, RoundTripsRandomInputs) {
  crypto::SeededRandom rng(2024);
  for (size_t len = 0; len < 300; ++len) {
    const Bytes data = rng.Generate(len);
    EXPECT_EQ(DecodeBase64Url(EncodeBase64Url(data)), data);
    EXPECT_EQ(DecodeBase64Url(EncodeBase64Url(data, Padding::kInclude)), data);
    EXPECT_EQ(DecodeBase64(EncodeBase64(data)), data);
  }
}

TEST(Base64UrlTest, ThirtyTwoRandomBytes) {
  const Bytes data = crypto::DefaultRandom().Generate(32);
  const std::string text = EncodeBase64Url(data);
  EXPECT_EQ(text.size(), 43u);
  EXPECT_EQ(DecodeBase64Url(text), data);
}

}  // namespace
}  // namespace cahicha::codec
