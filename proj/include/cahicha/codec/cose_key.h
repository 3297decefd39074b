#ifndef CAHICHA_CODEC_COSE_KEY_H_
#define CAHICHA_CODEC_COSE_KEY_H_

#include <cstdint>

#include "cahicha/codec/cbor.h"
#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/openssl_ptr.h"

namespace cahicha::codec {

enum class CoseKeyType : int64_t { kEc2 = 2, kRsa = 3 };

// Supported COSE algorithm identifiers.
enum class CoseAlgorithm : int64_t {
  kEs256 = -7,
  kRs256 = -257,
};

bool IsSupportedAlgorithm(int64_t alg);

struct CosePublicKey {
  CoseKeyType key_type = CoseKeyType::kEc2;
  CoseAlgorithm algorithm = CoseAlgorithm::kEs256;

  // EC2 on P-256.
  crypto::P256PublicPoint point;

  // RSA.
  Bytes modulus;
  Bytes exponent;

  static CosePublicKey FromP256(const crypto::P256PublicPoint& point);

  crypto::EvpPkeyPtr ToEvpKey() const;
  cbor::Value ToCbor() const;

  friend bool operator==(const CosePublicKey&, const CosePublicKey&) = default;
};

// Parses a COSE_Key map with integer labels. Key types or algorithms
// outside {EC2/ES256 on P-256, RSA/RS256} are kUnsupportedAlgorithm; wrong
// coordinate lengths, missing members or off-curve points are kMalformedKey.
CosePublicKey DecodeCoseKey(const cbor::Value& map);

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_COSE_KEY_H_
