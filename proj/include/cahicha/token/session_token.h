#ifndef CAHICHA_TOKEN_SESSION_TOKEN_H_
#define CAHICHA_TOKEN_SESSION_TOKEN_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/random.h"

namespace cahicha::token {

using Timestamp = std::chrono::system_clock::time_point;

// Versioned so a future payload layout can be rotated in.
inline constexpr char kMagic[] = "CAHICHA-OK-1";
inline constexpr char kPayloadSeparator = '|';
inline constexpr std::chrono::milliseconds kDefaultMaxAge = std::chrono::hours(24);
inline constexpr std::chrono::milliseconds kClockSkewAllowance = std::chrono::seconds(60);

struct TokenPayload {
  std::string magic = kMagic;
  uint64_t minted_at_ms = 0;

  // magic '|' decimal-milliseconds
  std::string Serialize() const;
  // Exact inverse of Serialize(); nullopt for anything else.
  static std::optional<TokenPayload> Parse(std::string_view text);
};

// 16-byte HMAC key followed by 16-byte AES-128 key (Fernet layout).
class TokenKey {
 public:
  static constexpr size_t kSize = 32;

  // Throws std::invalid_argument unless |raw| is exactly 32 bytes.
  explicit TokenKey(ByteView raw);
  TokenKey(const TokenKey&) = default;
  TokenKey& operator=(const TokenKey&) = default;
  ~TokenKey();

  static TokenKey Generate(crypto::RandomSource& rng = crypto::DefaultRandom());

  // Reads 32 raw bytes from |path|, or creates the file (mode 0600) with a
  // fresh key when it does not exist. Throws std::runtime_error when the
  // file exists with the wrong size or cannot be written.
  static TokenKey LoadOrCreate(const std::filesystem::path& path,
                               crypto::RandomSource& rng = crypto::DefaultRandom());

  ByteView signing_key() const { return ByteView(bytes_).first(16); }
  ByteView encryption_key() const { return ByteView(bytes_).last(16); }
  ByteView raw() const { return bytes_; }

 private:
  std::array<uint8_t, kSize> bytes_{};
};

enum class InvalidReason { kMalformedContainer, kIntegrityFailure, kBadMagic, kExpired, kClockSkew };

std::string_view InvalidReasonName(InvalidReason reason);

struct TokenValidation {
  bool valid = false;
  std::chrono::milliseconds age{0};
  std::optional<InvalidReason> reason;

  explicit operator bool() const { return valid; }
};

// Fernet container: 0x80 | u64be seconds | IV | AES-128-CBC(PKCS7) | HMAC,
// base64url with padding. |iv| must be 16 bytes.
std::string SealFernet(const TokenKey& key, ByteView plaintext, uint64_t timestamp_seconds,
                       ByteView iv);

struct OpenedFernet {
  std::optional<Bytes> plaintext;
  uint64_t timestamp_seconds = 0;
  InvalidReason failure = InvalidReason::kMalformedContainer;
};

// Checks layout and HMAC, then decrypts. On failure |plaintext| is empty
// and |failure| says why.
OpenedFernet OpenFernet(const TokenKey& key, std::string_view token);

// Throws crypto::EntropyUnavailable when no IV can be drawn.
std::string MintToken(const TokenKey& key, Timestamp now,
                      crypto::RandomSource& rng = crypto::DefaultRandom());

// Valid iff the container authenticates, the payload carries the exact
// magic, the mint time is at most kClockSkewAllowance in the future, and
// now - minted_at <= max_age.
TokenValidation ValidateToken(const TokenKey& key, std::string_view token, Timestamp now,
                              std::chrono::milliseconds max_age = kDefaultMaxAge);

}  // namespace cahicha::token

#endif  // CAHICHA_TOKEN_SESSION_TOKEN_H_
