#include "cahicha/crypto/keys.h"

#include <algorithm>
#include <cstring>
#include <string>

#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/rsa.h>

#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/errors.h"

namespace cahicha::crypto {
namespace {

using ParamBldPtr =
    std::unique_ptr<OSSL_PARAM_BLD, OpenSslDeleter<OSSL_PARAM_BLD, OSSL_PARAM_BLD_free>>;
using ParamPtr = std::unique_ptr<OSSL_PARAM, OpenSslDeleter<OSSL_PARAM, OSSL_PARAM_free>>;

constexpr char kP256GroupName[] = "prime256v1";

EcGroupPtr P256Group() {
  EcGroupPtr group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
  if (!group) throw CryptoError("P-256 group unavailable");
  return group;
}

BignumPtr BnFromBytes(ByteView b) {
  BignumPtr bn(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!bn) throw CryptoError("BN_bin2bn failed");
  return bn;
}

EvpPkeyPtr KeyFromParams(const char* type, int selection, OSSL_PARAM_BLD* bld) {
  ParamPtr params(OSSL_PARAM_BLD_to_param(bld));
  EvpPkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, type, nullptr));
  if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) <= 0) return nullptr;
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_fromdata(ctx.get(), &raw, selection, params.get()) <= 0) return nullptr;
  return EvpPkeyPtr(raw);
}

bool DigestVerify(const EVP_PKEY* key, ByteView message, ByteView sig) {
  EvpMdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) throw CryptoError("EVP_MD_CTX_new failed");
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr,
                           const_cast<EVP_PKEY*>(key)) != 1)
    return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) ==
         1;
}

}  // namespace

EvpPkeyPtr GenerateP256Key(RandomSource& rng) {
  EcGroupPtr group = P256Group();
  BnCtxPtr bn_ctx(BN_CTX_new());
  const BIGNUM* order = EC_GROUP_get0_order(group.get());
  BignumPtr priv;
  for (;;) {
    Bytes candidate = rng.Generate(32);
    priv = BnFromBytes(candidate);
    if (!BN_is_zero(priv.get()) && BN_cmp(priv.get(), order) < 0) break;
  }
  EcPointPtr pub(EC_POINT_new(group.get()));
  if (!pub || !EC_POINT_mul(group.get(), pub.get(), priv.get(), nullptr, nullptr, bn_ctx.get()))
    throw CryptoError("EC_POINT_mul failed");
  uint8_t encoded[65];
  if (EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED, encoded,
                         sizeof(encoded), bn_ctx.get()) != sizeof(encoded))
    throw CryptoError("EC_POINT_point2oct failed");

  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  if (!bld ||
      !OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, kP256GroupName, 0) ||
      !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_PRIV_KEY, priv.get()) ||
      !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, encoded,
                                        sizeof(encoded)))
    throw CryptoError("OSSL_PARAM_BLD failed");
  EvpPkeyPtr key = KeyFromParams("EC", EVP_PKEY_KEYPAIR, bld.get());
  if (!key) throw CryptoError("EVP_PKEY_fromdata(EC keypair) failed");
  return key;
}

EvpPkeyPtr P256KeyFromPoint(const P256PublicPoint& point) {
  uint8_t encoded[65];
  encoded[0] = 0x04;
  std::copy(point.x.begin(), point.x.end(), encoded + 1);
  std::copy(point.y.begin(), point.y.end(), encoded + 33);

  EcGroupPtr group = P256Group();
  EcPointPtr pt(EC_POINT_new(group.get()));
  if (!pt || EC_POINT_oct2point(group.get(), pt.get(), encoded, sizeof(encoded), nullptr) != 1 ||
      EC_POINT_is_on_curve(group.get(), pt.get(), nullptr) != 1)
    return nullptr;

  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  if (!bld ||
      !OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, kP256GroupName, 0) ||
      !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, encoded,
                                        sizeof(encoded)))
    throw CryptoError("OSSL_PARAM_BLD failed");
  return KeyFromParams("EC", EVP_PKEY_PUBLIC_KEY, bld.get());
}

P256PublicPoint P256PointOf(const EVP_PKEY* key) {
  BIGNUM* x = nullptr;
  BIGNUM* y = nullptr;
  if (EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_EC_PUB_X, &x) != 1 ||
      EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_EC_PUB_Y, &y) != 1) {
    BN_free(x);
    BN_free(y);
    throw CryptoError("key has no EC public point");
  }
  BignumPtr xs(x), ys(y);
  P256PublicPoint out;
  if (BN_bn2binpad(x, out.x.data(), 32) != 32 || BN_bn2binpad(y, out.y.data(), 32) != 32)
    throw CryptoError("EC coordinate wider than 32 bytes");
  return out;
}

EvpPkeyPtr RsaKeyFromComponents(ByteView modulus, ByteView exponent) {
  if (modulus.empty() || exponent.empty()) return nullptr;
  BignumPtr n = BnFromBytes(modulus);
  BignumPtr e = BnFromBytes(exponent);
  ParamBldPtr bld(OSSL_PARAM_BLD_new());
  if (!bld || !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) ||
      !OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()))
    throw CryptoError("OSSL_PARAM_BLD failed");
  return KeyFromParams("RSA", EVP_PKEY_PUBLIC_KEY, bld.get());
}

EvpPkeyPtr GenerateRsaKey(int bits) {
  EvpPkeyPtr key(EVP_RSA_gen(static_cast<unsigned int>(bits)));
  if (!key) throw CryptoError("RSA key generation failed");
  return key;
}

Bytes SignEs256(const EVP_PKEY* key, ByteView message) {
  BIGNUM* d_raw = nullptr;
  if (EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_PRIV_KEY, &d_raw) != 1)
    throw CryptoError("key has no private scalar");
  BignumPtr d(d_raw);
  uint8_t d_bytes[32];
  BN_bn2binpad(d.get(), d_bytes, sizeof(d_bytes));

  EcGroupPtr group = P256Group();
  BnCtxPtr ctx(BN_CTX_new());
  const BIGNUM* n = EC_GROUP_get0_order(group.get());
  const Sha256Digest digest = Sha256(message);
  BignumPtr e = BnFromBytes(digest);

  // Nonce: HMAC(d, digest || counter), re-drawn until it lands in [1, n).
  for (uint8_t counter = 0;; ++counter) {
    Bytes nonce_input(digest.begin(), digest.end());
    nonce_input.push_back(counter);
    const Sha256Digest k_bytes = HmacSha256(d_bytes, nonce_input);
    BignumPtr k = BnFromBytes(k_bytes);
    if (BN_is_zero(k.get()) || BN_cmp(k.get(), n) >= 0) continue;

    EcPointPtr r_point(EC_POINT_new(group.get()));
    BignumPtr rx(BN_new()), r(BN_new()), s(BN_new()), kinv(BN_new()), tmp(BN_new());
    if (!EC_POINT_mul(group.get(), r_point.get(), k.get(), nullptr, nullptr, ctx.get()) ||
        !EC_POINT_get_affine_coordinates(group.get(), r_point.get(), rx.get(), nullptr,
                                         ctx.get()) ||
        !BN_nnmod(r.get(), rx.get(), n, ctx.get()))
      throw CryptoError("ECDSA r computation failed");
    if (BN_is_zero(r.get())) continue;
    if (!BN_mod_inverse(kinv.get(), k.get(), n, ctx.get()) ||
        !BN_mod_mul(tmp.get(), r.get(), d.get(), n, ctx.get()) ||
        !BN_mod_add(tmp.get(), tmp.get(), e.get(), n, ctx.get()) ||
        !BN_mod_mul(s.get(), kinv.get(), tmp.get(), n, ctx.get()))
      throw CryptoError("ECDSA s computation failed");
    if (BN_is_zero(s.get())) continue;

    EcdsaSigPtr sig(ECDSA_SIG_new());
    if (!sig || !ECDSA_SIG_set0(sig.get(), r.release(), s.release()))
      throw CryptoError("ECDSA_SIG_set0 failed");
    uint8_t* der = nullptr;
    const int len = i2d_ECDSA_SIG(sig.get(), &der);
    if (len <= 0) throw CryptoError("i2d_ECDSA_SIG failed");
    Bytes out(der, der + len);
    OPENSSL_free(der);
    return out;
  }
}

Bytes SignRs256(const EVP_PKEY* key, ByteView message) {
  EvpMdCtxPtr ctx(EVP_MD_CTX_new());
  size_t len = 0;
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr,
                         const_cast<EVP_PKEY*>(key)) != 1 ||
      EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()) != 1)
    throw CryptoError("RS256 sign init failed");
  Bytes out(len);
  if (EVP_DigestSign(ctx.get(), out.data(), &len, message.data(), message.size()) != 1)
    throw CryptoError("RS256 sign failed");
  out.resize(len);
  return out;
}

bool VerifyEs256(const EVP_PKEY* key, ByteView message, ByteView der_signature) {
  if (!key || !IsP256Key(key)) return false;
  return DigestVerify(key, message, der_signature);
}

bool VerifyRs256(const EVP_PKEY* key, ByteView message, ByteView signature) {
  if (!key || !IsRsaKey(key)) return false;
  return DigestVerify(key, message, signature);
}

Bytes EcdsaRawToDer(ByteView raw) {
  if (raw.size() != 64) return {};
  EcdsaSigPtr sig(ECDSA_SIG_new());
  BignumPtr r = BnFromBytes(raw.first(32));
  BignumPtr s = BnFromBytes(raw.last(32));
  if (!sig || !ECDSA_SIG_set0(sig.get(), r.release(), s.release())) return {};
  uint8_t* der = nullptr;
  const int len = i2d_ECDSA_SIG(sig.get(), &der);
  if (len <= 0) return {};
  Bytes out(der, der + len);
  OPENSSL_free(der);
  return out;
}

Bytes EcdsaDerToRaw(ByteView der) {
  const uint8_t* p = der.data();
  EcdsaSigPtr sig(d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
  if (!sig || p != der.data() + der.size()) return {};
  const BIGNUM* r = nullptr;
  const BIGNUM* s = nullptr;
  ECDSA_SIG_get0(sig.get(), &r, &s);
  Bytes out(64);
  if (BN_bn2binpad(r, out.data(), 32) != 32 || BN_bn2binpad(s, out.data() + 32, 32) != 32)
    return {};
  return out;
}

bool IsP256Key(const EVP_PKEY* key) {
  if (!key || !EVP_PKEY_is_a(key, "EC")) return false;
  char name[64] = {};
  size_t len = 0;
  if (EVP_PKEY_get_utf8_string_param(key, OSSL_PKEY_PARAM_GROUP_NAME, name, sizeof(name),
                                     &len) != 1)
    return false;
  return std::string(name, len) == kP256GroupName;
}

bool IsRsaKey(const EVP_PKEY* key) { return key && EVP_PKEY_is_a(key, "RSA"); }

}  // namespace cahicha::crypto
