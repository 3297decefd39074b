#ifndef CAHICHA_CRYPTO_RANDOM_H_
#define CAHICHA_CRYPTO_RANDOM_H_

#include <cstdint>
#include <span>

#include "cahicha/crypto/bytes.h"

namespace cahicha::crypto {

class RandomSource {
 public:
  virtual ~RandomSource() = default;

  // Throws EntropyUnavailable when the source cannot produce output.
  virtual void Fill(std::span<uint8_t> out) = 0;

  Bytes Generate(size_t n) {
    Bytes b(n);
    Fill(b);
    return b;
  }
};

// OpenSSL's CSPRNG.
class SecureRandom final : public RandomSource {
 public:
  void Fill(std::span<uint8_t> out) override;
};

// Deterministic byte stream derived from a seed (HMAC-SHA256 in counter
// mode). Only for reproducible fixtures; never for production secrets.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(uint64_t seed);
  explicit SeededRandom(ByteView seed);

  void Fill(std::span<uint8_t> out) override;

 private:
  Sha256Digest key_;
  uint64_t counter_ = 0;
};

// Process-wide secure source; stateless, safe from any thread.
RandomSource& DefaultRandom();

}  // namespace cahicha::crypto

#endif  // CAHICHA_CRYPTO_RANDOM_H_
