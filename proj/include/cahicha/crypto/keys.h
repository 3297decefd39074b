#ifndef CAHICHA_CRYPTO_KEYS_H_
#define CAHICHA_CRYPTO_KEYS_H_

#include <array>

#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/openssl_ptr.h"
#include "cahicha/crypto/random.h"

namespace cahicha::crypto {

using P256Coordinate = std::array<uint8_t, 32>;

struct P256PublicPoint {
  P256Coordinate x{};
  P256Coordinate y{};

  friend bool operator==(const P256PublicPoint&, const P256PublicPoint&) = default;
};

// Generates a P-256 key whose private scalar is drawn from |rng|, so a
// seeded source yields a reproducible key.
EvpPkeyPtr GenerateP256Key(RandomSource& rng);

// Builds a verification key from affine coordinates. Returns nullptr when
// the point is not on the curve.
EvpPkeyPtr P256KeyFromPoint(const P256PublicPoint& point);

// Affine coordinates of an EC P-256 key.
P256PublicPoint P256PointOf(const EVP_PKEY* key);

// RSA public key from big-endian modulus and exponent. nullptr on failure.
EvpPkeyPtr RsaKeyFromComponents(ByteView modulus, ByteView exponent);

EvpPkeyPtr GenerateRsaKey(int bits);

// ECDSA over SHA-256, DER-encoded signature. The nonce is derived from the
// private key and message digest, so identical inputs give identical output.
Bytes SignEs256(const EVP_PKEY* key, ByteView message);

// RSASSA-PKCS1-v1_5 over SHA-256.
Bytes SignRs256(const EVP_PKEY* key, ByteView message);

// Both return false on any malformed signature or key mismatch.
bool VerifyEs256(const EVP_PKEY* key, ByteView message, ByteView der_signature);
bool VerifyRs256(const EVP_PKEY* key, ByteView message, ByteView signature);

// Conversions between the fixed-width r||s form (JWS) and DER (X9.62).
Bytes EcdsaRawToDer(ByteView raw);
Bytes EcdsaDerToRaw(ByteView der);

bool IsP256Key(const EVP_PKEY* key);
bool IsRsaKey(const EVP_PKEY* key);

}  // namespace cahicha::crypto

#endif  // CAHICHA_CRYPTO_KEYS_H_
