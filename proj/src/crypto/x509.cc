#include "cahicha/crypto/x509.h"

#include <algorithm>
#include <cstring>

#include <openssl/bio.h>
#include <openssl/pem.h>
#include <openssl/x509v3.h>

#include "cahicha/crypto/errors.h"

namespace cahicha::crypto {
namespace {

using BioPtr = std::unique_ptr<BIO, OpenSslDeleter<BIO, BIO_free_all>>;

bool LooksLikePem(ByteView data) {
  static constexpr std::string_view kMarker = "-----BEGIN";
  const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
  return text.find(kMarker) != std::string_view::npos;
}

}  // namespace

X509Ptr ParseCertificateDer(ByteView der) {
  if (der.empty()) return nullptr;
  const uint8_t* p = der.data();
  X509Ptr cert(d2i_X509(nullptr, &p, static_cast<long>(der.size())));
  if (!cert || p != der.data() + der.size()) return nullptr;
  return cert;
}

X509Ptr ParseCertificate(ByteView der_or_pem) {
  if (!LooksLikePem(der_or_pem)) return ParseCertificateDer(der_or_pem);
  BioPtr bio(BIO_new_mem_buf(der_or_pem.data(), static_cast<int>(der_or_pem.size())));
  if (!bio) return nullptr;
  return X509Ptr(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr));
}

Bytes CertificateDer(const X509* cert) {
  uint8_t* der = nullptr;
  const int len = i2d_X509(cert, &der);
  if (len <= 0) throw CryptoError("i2d_X509 failed");
  Bytes out(der, der + len);
  OPENSSL_free(der);
  return out;
}

std::string CertificatePem(const X509* cert) {
  BioPtr bio(BIO_new(BIO_s_mem()));
  if (!bio || PEM_write_bio_X509(bio.get(), const_cast<X509*>(cert)) != 1)
    throw CryptoError("PEM_write_bio_X509 failed");
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

EvpPkeyPtr CertificatePublicKey(const X509* cert) {
  return EvpPkeyPtr(X509_get_pubkey(const_cast<X509*>(cert)));
}

std::optional<std::array<uint8_t, 16>> CertificateAaguid(const X509* cert) {
  Asn1ObjectPtr oid(OBJ_txt2obj(kFidoAaguidOid, 1));
  if (!oid) return std::nullopt;
  const int idx = X509_get_ext_by_OBJ(cert, oid.get(), -1);
  if (idx < 0) return std::nullopt;
  X509_EXTENSION* ext = X509_get_ext(cert, idx);
  const ASN1_OCTET_STRING* outer = X509_EXTENSION_get_data(ext);
  const uint8_t* p = ASN1_STRING_get0_data(outer);
  const long outer_len = ASN1_STRING_length(outer);
  const uint8_t* end = p + outer_len;
  Asn1OctetStringPtr inner(d2i_ASN1_OCTET_STRING(nullptr, &p, outer_len));
  if (!inner || p != end || ASN1_STRING_length(inner.get()) != 16) return std::nullopt;
  std::array<uint8_t, 16> out;
  std::memcpy(out.data(), ASN1_STRING_get0_data(inner.get()), 16);
  return out;
}

ChainCheck VerifyCertificateChain(const X509* leaf, std::span<X509* const> intermediates,
                                  std::span<X509* const> anchors,
                                  std::chrono::system_clock::time_point at) {
  if (!leaf) return {false, "no leaf certificate"};
  if (anchors.empty()) return {false, "no trust anchors"};

  X509StorePtr store(X509_STORE_new());
  if (!store) throw CryptoError("X509_STORE_new failed");
  for (X509* anchor : anchors) {
    if (X509_STORE_add_cert(store.get(), anchor) != 1)
      return {false, "unusable trust anchor"};
  }
  X509StackPtr untrusted(sk_X509_new_null());
  for (X509* cert : intermediates) {
    X509_up_ref(cert);
    sk_X509_push(untrusted.get(), cert);
  }

  X509StoreCtxPtr ctx(X509_STORE_CTX_new());
  if (!ctx ||
      X509_STORE_CTX_init(ctx.get(), store.get(), const_cast<X509*>(leaf), untrusted.get()) != 1)
    throw CryptoError("X509_STORE_CTX_init failed");
  X509_STORE_CTX_set_flags(ctx.get(), X509_V_FLAG_PARTIAL_CHAIN);
  X509_STORE_CTX_set_time(ctx.get(), 0, std::chrono::system_clock::to_time_t(at));

  if (X509_verify_cert(ctx.get()) == 1) return {true, {}};
  const int err = X509_STORE_CTX_get_error(ctx.get());
  return {false, X509_verify_cert_error_string(err)};
}

}  // namespace cahicha::crypto
