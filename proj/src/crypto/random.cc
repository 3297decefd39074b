#include "cahicha/crypto/random.h"

#include <algorithm>
#include <climits>

#include <openssl/rand.h>

#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/errors.h"

namespace cahicha::crypto {

void SecureRandom::Fill(std::span<uint8_t> out) {
  while (!out.empty()) {
    const size_t chunk = std::min<size_t>(out.size(), INT_MAX);
    if (RAND_bytes(out.data(), static_cast<int>(chunk)) != 1) throw EntropyUnavailable();
    out = out.subspan(chunk);
  }
}

SeededRandom::SeededRandom(uint64_t seed) {
  uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(seed >> (56 - 8 * i));
  key_ = Sha256(buf);
}

SeededRandom::SeededRandom(ByteView seed) : key_(Sha256(seed)) {}

void SeededRandom::Fill(std::span<uint8_t> out) {
  while (!out.empty()) {
    uint8_t ctr[8];
    for (int i = 0; i < 8; ++i) ctr[i] = static_cast<uint8_t>(counter_ >> (56 - 8 * i));
    ++counter_;
    const Sha256Digest block = HmacSha256(key_, ctr);
    const size_t n = std::min(out.size(), block.size());
    std::copy_n(block.begin(), n, out.begin());
    out = out.subspan(n);
  }
}

RandomSource& DefaultRandom() {
  static SecureRandom source;
  return source;
}

}  // namespace cahicha::crypto
