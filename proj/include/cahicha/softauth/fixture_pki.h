#ifndef CAHICHA_SOFTAUTH_FIXTURE_PKI_H_
#define CAHICHA_SOFTAUTH_FIXTURE_PKI_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cahicha/codec/authenticator_data.h"
#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/openssl_ptr.h"
#include "cahicha/crypto/random.h"

namespace cahicha::softauth {

struct CertificateSpec {
  std::string common_name;
  std::string organization = "CAHICHA Test Fixtures";
  std::string org_unit;
  std::string country = "US";
  bool is_ca = false;
  // Emitted as the FIDO AAGUID extension when set.
  std::optional<codec::Aaguid> aaguid;
  std::vector<std::string> dns_names;
  std::vector<std::string> ip_addresses;
  std::chrono::system_clock::time_point not_before =
      std::chrono::system_clock::now() - std::chrono::hours(24);
  std::chrono::system_clock::time_point not_after =
      std::chrono::system_clock::now() + std::chrono::hours(24 * 3650);
  uint64_t serial = 1;
};

struct KeyAndCertificate {
  crypto::EvpPkeyPtr key;
  crypto::X509Ptr cert;

  Bytes der() const;
  std::string pem() const;
  std::string private_key_pem() const;
};

// P-256 key plus a certificate signed by |issuer|, or self-signed when
// |issuer| is null.
KeyAndCertificate MakeCertificate(const CertificateSpec& spec, const KeyAndCertificate* issuer,
                                  crypto::RandomSource& rng = crypto::DefaultRandom());

// Self-signed localhost certificate (SAN localhost, 127.0.0.1) for the
// TLS dev setup.
KeyAndCertificate MakeLocalhostTlsCertificate(crypto::RandomSource& rng = crypto::DefaultRandom());

struct MdsEntrySpec {
  codec::Aaguid aaguid{};
  std::string description;
  std::vector<Bytes> attestation_roots;
  std::string status = "FIDO_CERTIFIED_L1";
};

struct MdsBlobSpec {
  int64_t serial = 1;
  std::string next_update = "2099-12-31";
  std::vector<MdsEntrySpec> entries;
};

// Compact-serialized ES256 blob whose header x5c is [signer].
std::string WriteMdsBlob(const MdsBlobSpec& spec, const KeyAndCertificate& signer);

// An attestation key pair with its x5c chain (leaf first).
struct AttestationIdentity {
  crypto::EvpPkeyPtr key;
  std::vector<Bytes> x5c;
};

std::string PrivateKeyPem(const EVP_PKEY* key);

// PEM private key plus a PEM bundle of certificates, leaf first. Throws
// std::runtime_error when either does not parse.
AttestationIdentity LoadAttestationIdentity(std::string_view key_pem, std::string_view chain_pem);
std::string AttestationChainPem(const AttestationIdentity& identity);

// A self-made vendor CA that issues attestation certificates, plus a
// separate root and signer for metadata blobs.
class FixtureAuthority {
 public:
  explicit FixtureAuthority(crypto::RandomSource& rng = crypto::DefaultRandom());

  // Leaf with OU "Authenticator Attestation" and the AAGUID extension.
  AttestationIdentity IssueAttestationIdentity(const codec::Aaguid& aaguid) const;

  // Blob registering each AAGUID under the vendor CA with |status|.
  std::string MdsBlobFor(const std::vector<codec::Aaguid>& aaguids,
                         const std::string& status = "FIDO_CERTIFIED_L1") const;
  std::string MdsBlob(const MdsBlobSpec& spec) const;

  const KeyAndCertificate& attestation_root() const { return attestation_root_; }
  const KeyAndCertificate& mds_root() const { return mds_root_; }
  const KeyAndCertificate& mds_signer() const { return mds_signer_; }

 private:
  crypto::RandomSource& rng_;
  KeyAndCertificate attestation_root_;
  KeyAndCertificate mds_root_;
  KeyAndCertificate mds_signer_;
  mutable uint64_t next_serial_ = 100;
};

}  // namespace cahicha::softauth

#endif  // CAHICHA_SOFTAUTH_FIXTURE_PKI_H_
