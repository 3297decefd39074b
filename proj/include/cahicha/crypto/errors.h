#ifndef CAHICHA_CRYPTO_ERRORS_H_
#define CAHICHA_CRYPTO_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cahicha::crypto {

// An OpenSSL primitive failed for a reason unrelated to the input data.
class CryptoError : public std::runtime_error {
 public:
  explicit CryptoError(const std::string& what);
};

// The secure randomness source could not deliver bytes. Callers must refuse
// the operation rather than fall back to a weaker source.
class EntropyUnavailable : public std::runtime_error {
 public:
  EntropyUnavailable() : std::runtime_error("secure randomness unavailable") {}
};

}  // namespace cahicha::crypto

#endif  // CAHICHA_CRYPTO_ERRORS_H_
