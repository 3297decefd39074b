#include "cahicha/token/session_token.h"

#include <fcntl.h>
#include <unistd.h>

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "cahicha/codec/base64.h"
#include "cahicha/codec/errors.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/errors.h"
#include "cahicha/crypto/openssl_ptr.h"

namespace cahicha::token {
namespace {

constexpr uint8_t kVersion = 0x80;
constexpr size_t kHeaderSize = 1 + 8 + 16;
constexpr size_t kHmacSize = 32;
constexpr size_t kBlockSize = 16;

std::optional<Bytes> Aes128Cbc(bool encrypt, ByteView key, ByteView iv, ByteView input) {
  crypto::EvpCipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx ||
      EVP_CipherInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, key.data(), iv.data(),
                        encrypt ? 1 : 0) != 1)
    throw crypto::CryptoError("AES-128-CBC init failed");
  Bytes out(input.size() + kBlockSize);
  int len = 0;
  int total = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &len, input.data(), static_cast<int>(input.size())) !=
      1)
    return std::nullopt;
  total = len;
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + total, &len) != 1) return std::nullopt;
  total += len;
  out.resize(total);
  return out;
}

}  // namespace

std::string TokenPayload::Serialize() const {
  return magic + kPayloadSeparator + std::to_string(minted_at_ms);
}

std::optional<TokenPayload> TokenPayload::Parse(std::string_view text) {
  const size_t sep = text.rfind(kPayloadSeparator);
  if (sep == std::string_view::npos) return std::nullopt;
  const std::string_view digits = text.substr(sep + 1);
  if (digits.empty() || (digits.size() > 1 && digits.front() == '0')) return std::nullopt;
  TokenPayload out;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.minted_at_ms);
  if (ec != std::errc() || end != digits.data() + digits.size()) return std::nullopt;
  out.magic = std::string(text.substr(0, sep));
  return out;
}

TokenKey::TokenKey(ByteView raw) {
  if (raw.size() != kSize) throw std::invalid_argument("token key must be 32 bytes");
  std::copy(raw.begin(), raw.end(), bytes_.begin());
}

TokenKey::~TokenKey() { OPENSSL_cleanse(bytes_.data(), bytes_.size()); }

TokenKey TokenKey::Generate(crypto::RandomSource& rng) {
  std::array<uint8_t, kSize> raw;
  rng.Fill(raw);
  TokenKey key(raw);
  OPENSSL_cleanse(raw.data(), raw.size());
  return key;
}

TokenKey TokenKey::LoadOrCreate(const std::filesystem::path& path, crypto::RandomSource& rng) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() != kSize)
      throw std::runtime_error("token key file " + path.string() + " is not 32 bytes");
    TokenKey key(raw);
    OPENSSL_cleanse(raw.data(), raw.size());
    return key;
  }
  TokenKey key = Generate(rng);
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0600);
  if (fd < 0) throw std::runtime_error("cannot create token key file " + path.string());
  const ssize_t written = ::write(fd, key.bytes_.data(), key.bytes_.size());
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (written != static_cast<ssize_t>(kSize) || !synced)
    throw std::runtime_error("cannot write token key file " + path.string());
  return key;
}

std::string_view InvalidReasonName(InvalidReason reason) {
  switch (reason) {
    case InvalidReason::kMalformedContainer:
      return "MalformedContainer";
    case InvalidReason::kIntegrityFailure:
      return "IntegrityFailure";
    case InvalidReason::kBadMagic:
      return "BadMagic";
    case InvalidReason::kExpired:
      return "Expired";
    case InvalidReason::kClockSkew:
      return "ClockSkew";
  }
  return "Unknown";
}

std::string SealFernet(const TokenKey& key, ByteView plaintext, uint64_t timestamp_seconds,
                       ByteView iv) {
  if (iv.size() != kBlockSize) throw std::invalid_argument("IV must be 16 bytes");
  Bytes container;
  container.push_back(kVersion);
  for (int shift = 56; shift >= 0; shift -= 8)
    container.push_back(static_cast<uint8_t>(timestamp_seconds >> shift));
  container.insert(container.end(), iv.begin(), iv.end());
  const std::optional<Bytes> ciphertext = Aes128Cbc(true, key.encryption_key(), iv, plaintext);
  if (!ciphertext) throw crypto::CryptoError("AES-128-CBC encryption failed");
  container.insert(container.end(), ciphertext->begin(), ciphertext->end());
  const Sha256Digest mac = crypto::HmacSha256(key.signing_key(), container);
  container.insert(container.end(), mac.begin(), mac.end());
  return codec::EncodeBase64Url(container, codec::Padding::kInclude);
}

OpenedFernet OpenFernet(const TokenKey& key, std::string_view token) {
  OpenedFernet out;
  Bytes container;
  try {
    container = codec::DecodeBase64Url(token);
  } catch (const codec::CodecError&) {
    return out;
  }
  if (container.size() < kHeaderSize + kBlockSize + kHmacSize ||
      (container.size() - kHeaderSize - kHmacSize) % kBlockSize != 0 || container[0] != kVersion)
    return out;

  const ByteView all(container);
  const ByteView authenticated = all.first(container.size() - kHmacSize);
  const Sha256Digest expected = crypto::HmacSha256(key.signing_key(), authenticated);
  if (!crypto::ConstantTimeEquals(expected, all.last(kHmacSize))) {
    out.failure = InvalidReason::kIntegrityFailure;
    return out;
  }
  for (int i = 1; i <= 8; ++i) out.timestamp_seconds = (out.timestamp_seconds << 8) | container[i];
  std::optional<Bytes> plaintext = Aes128Cbc(false, key.encryption_key(),
                                             all.subspan(9, kBlockSize),
                                             authenticated.subspan(kHeaderSize));
  if (!plaintext) {
    out.failure = InvalidReason::kIntegrityFailure;
    return out;
  }
  out.plaintext = std::move(plaintext);
  return out;
}

std::string MintToken(const TokenKey& key, Timestamp now, crypto::RandomSource& rng) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch());
  TokenPayload payload;
  payload.minted_at_ms = static_cast<uint64_t>(ms.count());
  const Bytes iv = rng.Generate(kBlockSize);
  return SealFernet(key, AsBytes(payload.Serialize()), static_cast<uint64_t>(ms.count() / 1000),
                    iv);
}

TokenValidation ValidateToken(const TokenKey& key, std::string_view token, Timestamp now,
                              std::chrono::milliseconds max_age) {
  TokenValidation result;
  const OpenedFernet opened = OpenFernet(key, token);
  if (!opened.plaintext) {
    result.reason = opened.failure;
    return result;
  }
  const std::string_view text(reinterpret_cast<const char*>(opened.plaintext->data()),
                              opened.plaintext->size());
  const std::optional<TokenPayload> payload = TokenPayload::Parse(text);
  if (!payload || payload->magic != kMagic) {
    result.reason = InvalidReason::kBadMagic;
    return result;
  }

  const int64_t now_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  const int64_t minted = static_cast<int64_t>(payload->minted_at_ms);
  const int64_t age = now_ms - minted;
  if (age < -kClockSkewAllowance.count()) {
    result.reason = InvalidReason::kClockSkew;
    return result;
  }
  if (age > max_age.count()) {
    result.reason = InvalidReason::kExpired;
    return result;
  }
  result.valid = true;
  result.age = std::chrono::milliseconds(std::max<int64_t>(age, 0));
  return result;
}

}  // namespace cahicha::token
