#include "cahicha/codec/cose_key.h"

#include <algorithm>

#include "cahicha/codec/errors.h"

namespace cahicha::codec {
namespace {

// COSE_Key labels (RFC 9052/9053).
constexpr int64_t kLabelKty = 1;
constexpr int64_t kLabelAlg = 3;
constexpr int64_t kLabelCrv = -1;   // EC2
constexpr int64_t kLabelX = -2;     // EC2
constexpr int64_t kLabelY = -3;     // EC2
constexpr int64_t kLabelN = -1;     // RSA
constexpr int64_t kLabelE = -2;     // RSA
constexpr int64_t kCurveP256 = 1;

const Bytes& RequireBytes(const cbor::Value& map, int64_t label, const char* name) {
  const cbor::Value* v = map.Find(label);
  if (!v || !v->is_bytes()) throw CodecError(CodecErrc::kMalformedKey, std::string("missing ") + name);
  return v->bytes();
}

}  // namespace

bool IsSupportedAlgorithm(int64_t alg) {
  return alg == static_cast<int64_t>(CoseAlgorithm::kEs256) ||
         alg == static_cast<int64_t>(CoseAlgorithm::kRs256);
}

CosePublicKey CosePublicKey::FromP256(const crypto::P256PublicPoint& point) {
  CosePublicKey key;
  key.key_type = CoseKeyType::kEc2;
  key.algorithm = CoseAlgorithm::kEs256;
  key.point = point;
  return key;
}

crypto::EvpPkeyPtr CosePublicKey::ToEvpKey() const {
  crypto::EvpPkeyPtr key = key_type == CoseKeyType::kEc2
                               ? crypto::P256KeyFromPoint(point)
                               : crypto::RsaKeyFromComponents(modulus, exponent);
  if (!key) throw CodecError(CodecErrc::kMalformedKey, "key material is not a valid public key");
  return key;
}

cbor::Value CosePublicKey::ToCbor() const {
  cbor::Value::Map map;
  map.emplace_back(kLabelKty, static_cast<int64_t>(key_type));
  map.emplace_back(kLabelAlg, static_cast<int64_t>(algorithm));
  if (key_type == CoseKeyType::kEc2) {
    map.emplace_back(kLabelCrv, kCurveP256);
    map.emplace_back(kLabelX, Bytes(point.x.begin(), point.x.end()));
    map.emplace_back(kLabelY, Bytes(point.y.begin(), point.y.end()));
  } else {
    map.emplace_back(kLabelN, modulus);
    map.emplace_back(kLabelE, exponent);
  }
  return cbor::Value(std::move(map));
}

CosePublicKey DecodeCoseKey(const cbor::Value& map) {
  if (!map.is_map()) throw CodecError(CodecErrc::kMalformedKey, "COSE key is not a map");
  const cbor::Value* kty = map.Find(kLabelKty);
  const cbor::Value* alg = map.Find(kLabelAlg);
  if (!kty || !kty->is_integer()) throw CodecError(CodecErrc::kMalformedKey, "missing kty");
  if (!alg || !alg->is_integer()) throw CodecError(CodecErrc::kMalformedKey, "missing alg");

  CosePublicKey key;
  if (kty->integer() == static_cast<int64_t>(CoseKeyType::kEc2)) {
    if (alg->integer() != static_cast<int64_t>(CoseAlgorithm::kEs256))
      throw CodecError(CodecErrc::kUnsupportedAlgorithm,
                       "EC2 key with alg " + std::to_string(alg->integer()));
    const cbor::Value* crv = map.Find(kLabelCrv);
    if (!crv || !crv->is_integer()) throw CodecError(CodecErrc::kMalformedKey, "missing crv");
    if (crv->integer() != kCurveP256)
      throw CodecError(CodecErrc::kUnsupportedAlgorithm,
                       "curve " + std::to_string(crv->integer()));
    const Bytes& x = RequireBytes(map, kLabelX, "x");
    const Bytes& y = RequireBytes(map, kLabelY, "y");
    if (x.size() != 32 || y.size() != 32)
      throw CodecError(CodecErrc::kMalformedKey, "P-256 coordinates must be 32 bytes");
    key.key_type = CoseKeyType::kEc2;
    key.algorithm = CoseAlgorithm::kEs256;
    std::copy(x.begin(), x.end(), key.point.x.begin());
    std::copy(y.begin(), y.end(), key.point.y.begin());
  } else if (kty->integer() == static_cast<int64_t>(CoseKeyType::kRsa)) {
    if (alg->integer() != static_cast<int64_t>(CoseAlgorithm::kRs256))
      throw CodecError(CodecErrc::kUnsupportedAlgorithm,
                       "RSA key with alg " + std::to_string(alg->integer()));
    key.key_type = CoseKeyType::kRsa;
    key.algorithm = CoseAlgorithm::kRs256;
    key.modulus = RequireBytes(map, kLabelN, "n");
    key.exponent = RequireBytes(map, kLabelE, "e");
    if (key.modulus.size() < 256 || key.modulus.front() == 0 || key.exponent.empty() ||
        key.exponent.size() > 8 || key.exponent.front() == 0)
      throw CodecError(CodecErrc::kMalformedKey, "RSA key parameters out of range");
  } else {
    throw CodecError(CodecErrc::kUnsupportedAlgorithm,
                     "key type " + std::to_string(kty->integer()));
  }
  // Rejects off-curve points and unusable RSA parameters up front.
  key.ToEvpKey();
  return key;
}

}  // namespace cahicha::codec
