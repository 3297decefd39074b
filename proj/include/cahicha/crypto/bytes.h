#ifndef CAHICHA_CRYPTO_BYTES_H_
#define CAHICHA_CRYPTO_BYTES_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cahicha {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Sha256Digest = std::array<uint8_t, 32>;

inline ByteView AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes ToBytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string ToString(ByteView b) {
  return std::string(b.begin(), b.end());
}

// Lowercase hex, mainly for logs and test diagnostics.
std::string HexEncode(ByteView b);

}  // namespace cahicha

#endif  // CAHICHA_CRYPTO_BYTES_H_
