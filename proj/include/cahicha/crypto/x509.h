#ifndef CAHICHA_CRYPTO_X509_H_
#define CAHICHA_CRYPTO_X509_H_

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/openssl_ptr.h"

namespace cahicha::crypto {

// OID of the FIDO AAGUID certificate extension.
inline constexpr char kFidoAaguidOid[] = "1.3.6.1.4.1.45724.1.1.4";

// nullptr when |der| is not exactly one well-formed certificate.
X509Ptr ParseCertificateDer(ByteView der);

// Accepts a single DER certificate or the first PEM certificate block.
X509Ptr ParseCertificate(ByteView der_or_pem);

Bytes CertificateDer(const X509* cert);
std::string CertificatePem(const X509* cert);

// Public key of the certificate (owned copy).
EvpPkeyPtr CertificatePublicKey(const X509* cert);

// Contents of the FIDO AAGUID extension, if present and well-formed.
std::optional<std::array<uint8_t, 16>> CertificateAaguid(const X509* cert);

struct ChainCheck {
  bool ok = false;
  std::string reason;
};

// Verifies |leaf| up to one of |anchors| through |intermediates| at time
// |at|. Anchors need not be self-signed.
ChainCheck VerifyCertificateChain(const X509* leaf, std::span<X509* const> intermediates,
                                  std::span<X509* const> anchors,
                                  std::chrono::system_clock::time_point at);

}  // namespace cahicha::crypto

#endif  // CAHICHA_CRYPTO_X509_H_
