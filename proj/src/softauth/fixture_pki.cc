#include "cahicha/softauth/fixture_pki.h"

#include <ctime>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/pem.h>
#include <openssl/x509v3.h>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/errors.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/x509.h"
#include "cahicha/mds/trust_store.h"

namespace cahicha::softauth {
namespace {

using BioPtr = std::unique_ptr<BIO, crypto::OpenSslDeleter<BIO, BIO_free_all>>;

void Check(int rc, const char* what) {
  if (rc != 1) throw crypto::CryptoError(what);
}

void AddNameEntry(X509_NAME* name, const char* field, const std::string& value) {
  if (value.empty()) return;
  Check(X509_NAME_add_entry_by_txt(name, field, MBSTRING_UTF8,
                                   reinterpret_cast<const unsigned char*>(value.data()),
                                   static_cast<int>(value.size()), -1, 0),
        "X509_NAME_add_entry_by_txt");
}

void AddV3(X509* cert, X509* issuer, int nid, const std::string& value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  crypto::X509ExtensionPtr ext(X509V3_EXT_conf_nid(nullptr, &ctx, nid, value.c_str()));
  if (!ext) throw crypto::CryptoError("X509V3_EXT_conf_nid failed for " + value);
  Check(X509_add_ext(cert, ext.get(), -1), "X509_add_ext");
}

void AddAaguidExtension(X509* cert, const codec::Aaguid& aaguid) {
  // extnValue wraps a DER OCTET STRING holding the 16 raw bytes.
  Bytes inner{0x04, 0x10};
  inner.insert(inner.end(), aaguid.begin(), aaguid.end());
  crypto::Asn1ObjectPtr oid(OBJ_txt2obj(crypto::kFidoAaguidOid, 1));
  crypto::Asn1OctetStringPtr value(ASN1_OCTET_STRING_new());
  if (!oid || !value) throw crypto::CryptoError("allocation failed");
  Check(ASN1_OCTET_STRING_set(value.get(), inner.data(), static_cast<int>(inner.size())),
        "ASN1_OCTET_STRING_set");
  crypto::X509ExtensionPtr ext(X509_EXTENSION_create_by_OBJ(nullptr, oid.get(), 0, value.get()));
  if (!ext) throw crypto::CryptoError("X509_EXTENSION_create_by_OBJ failed");
  Check(X509_add_ext(cert, ext.get(), -1), "X509_add_ext");
}

std::string ToPem(const EVP_PKEY* key) {
  BioPtr bio(BIO_new(BIO_s_mem()));
  if (!bio ||
      PEM_write_bio_PrivateKey(bio.get(), const_cast<EVP_PKEY*>(key), nullptr, nullptr, 0, nullptr, nullptr) != 1)
    throw crypto::CryptoError("PEM_write_bio_PrivateKey failed");
  char* data = nullptr;
  const long len = BIO_get_mem_data(bio.get(), &data);
  return std::string(data, static_cast<size_t>(len));
}

}  // namespace

std::string PrivateKeyPem(const EVP_PKEY* key) { return ToPem(key); }

AttestationIdentity LoadAttestationIdentity(std::string_view key_pem, std::string_view chain_pem) {
  AttestationIdentity out;
  BioPtr key_bio(BIO_new_mem_buf(key_pem.data(), static_cast<int>(key_pem.size())));
  out.key.reset(PEM_read_bio_PrivateKey(key_bio.get(), nullptr, nullptr, nullptr));
  if (!out.key) throw std::runtime_error("attestation key does not parse");
  BioPtr chain_bio(BIO_new_mem_buf(chain_pem.data(), static_cast<int>(chain_pem.size())));
  while (X509* cert = PEM_read_bio_X509(chain_bio.get(), nullptr, nullptr, nullptr)) {
    crypto::X509Ptr owned(cert);
    out.x5c.push_back(crypto::CertificateDer(cert));
  }
  ERR_clear_error();
  if (out.x5c.empty()) throw std::runtime_error("attestation chain holds no certificate");
  return out;
}

std::string AttestationChainPem(const AttestationIdentity& identity) {
  std::string out;
  for (const Bytes& der : identity.x5c) {
    crypto::X509Ptr cert = crypto::ParseCertificateDer(der);
    if (!cert) throw std::runtime_error("x5c entry does not parse");
    out += crypto::CertificatePem(cert.get());
  }
  return out;
}

Bytes KeyAndCertificate::der() const { return crypto::CertificateDer(cert.get()); }

std::string KeyAndCertificate::pem() const { return crypto::CertificatePem(cert.get()); }

std::string KeyAndCertificate::private_key_pem() const { return ToPem(key.get()); }

KeyAndCertificate MakeCertificate(const CertificateSpec& spec, const KeyAndCertificate* issuer,
                                  crypto::RandomSource& rng) {
  KeyAndCertificate out;
  out.key = crypto::GenerateP256Key(rng);
  out.cert.reset(X509_new());
  X509* cert = out.cert.get();
  if (!cert) throw crypto::CryptoError("X509_new failed");

  Check(X509_set_version(cert, 2), "X509_set_version");
  crypto::BignumPtr serial(BN_new());
  BN_set_word(serial.get(), spec.serial);
  BN_to_ASN1_INTEGER(serial.get(), X509_get_serialNumber(cert));

  const auto to_time_t = [](std::chrono::system_clock::time_point t) {
    return std::chrono::system_clock::to_time_t(t);
  };
  if (!ASN1_TIME_set(X509_getm_notBefore(cert), to_time_t(spec.not_before)) ||
      !ASN1_TIME_set(X509_getm_notAfter(cert), to_time_t(spec.not_after)))
    throw crypto::CryptoError("ASN1_TIME_set failed");

  crypto::X509NamePtr subject(X509_NAME_new());
  AddNameEntry(subject.get(), "C", spec.country);
  AddNameEntry(subject.get(), "O", spec.organization);
  AddNameEntry(subject.get(), "OU", spec.org_unit);
  AddNameEntry(subject.get(), "CN", spec.common_name);
  Check(X509_set_subject_name(cert, subject.get()), "X509_set_subject_name");
  Check(X509_set_issuer_name(cert, issuer ? X509_get_subject_name(issuer->cert.get())
                                          : subject.get()),
        "X509_set_issuer_name");
  Check(X509_set_pubkey(cert, out.key.get()), "X509_set_pubkey");

  X509* issuer_cert = issuer ? issuer->cert.get() : cert;
  if (spec.is_ca) {
    AddV3(cert, issuer_cert, NID_basic_constraints, "critical,CA:TRUE");
    AddV3(cert, issuer_cert, NID_key_usage, "critical,keyCertSign,cRLSign");
  } else {
    AddV3(cert, issuer_cert, NID_basic_constraints, "critical,CA:FALSE");
  }
  AddV3(cert, issuer_cert, NID_subject_key_identifier, "hash");
  if (issuer) AddV3(cert, issuer_cert, NID_authority_key_identifier, "keyid:always");

  std::string san;
  for (const std::string& dns : spec.dns_names) san += (san.empty() ? "" : ",") + ("DNS:" + dns);
  for (const std::string& ip : spec.ip_addresses) san += (san.empty() ? "" : ",") + ("IP:" + ip);
  if (!san.empty()) AddV3(cert, issuer_cert, NID_subject_alt_name, san);
  if (spec.aaguid) AddAaguidExtension(cert, *spec.aaguid);

  EVP_PKEY* signing_key = issuer ? issuer->key.get() : out.key.get();
  if (X509_sign(cert, signing_key, EVP_sha256()) <= 0) throw crypto::CryptoError("X509_sign failed");
  return out;
}

KeyAndCertificate MakeLocalhostTlsCertificate(crypto::RandomSource& rng) {
  CertificateSpec spec;
  spec.common_name = "localhost";
  spec.dns_names = {"localhost"};
  spec.ip_addresses = {"127.0.0.1"};
  spec.not_after = std::chrono::system_clock::now() + std::chrono::hours(24 * 825);
  return MakeCertificate(spec, nullptr, rng);
}

std::string WriteMdsBlob(const MdsBlobSpec& spec, const KeyAndCertificate& signer) {
  nlohmann::json header = {
      {"alg", "ES256"},
      {"typ", "JWT"},
      {"x5c", nlohmann::json::array({codec::EncodeBase64(signer.der())})},
  };
  nlohmann::json entries = nlohmann::json::array();
  for (const MdsEntrySpec& entry : spec.entries) {
    nlohmann::json roots = nlohmann::json::array();
    for (const Bytes& der : entry.attestation_roots) roots.push_back(codec::EncodeBase64(der));
    entries.push_back({
        {"aaguid", mds::FormatAaguid(entry.aaguid)},
        {"metadataStatement",
         {{"description", entry.description},
          {"aaguid", mds::FormatAaguid(entry.aaguid)},
          {"attestationRootCertificates", roots}}},
        {"statusReports", nlohmann::json::array({{{"status", entry.status},
                                                  {"effectiveDate", "2024-01-01"}}})},
        {"timeOfLastStatusChange", "2024-01-01"},
    });
  }
  nlohmann::json payload = {
      {"legalHeader", "Fixture metadata for tests."},
      {"no", spec.serial},
      {"nextUpdate", spec.next_update},
      {"entries", entries},
  };
  const std::string signing_input = codec::EncodeBase64Url(ToBytes(header.dump())) + "." +
                                    codec::EncodeBase64Url(ToBytes(payload.dump()));
  const Bytes der_sig = crypto::SignEs256(signer.key.get(), AsBytes(signing_input));
  return signing_input + "." + codec::EncodeBase64Url(crypto::EcdsaDerToRaw(der_sig));
}

FixtureAuthority::FixtureAuthority(crypto::RandomSource& rng) : rng_(rng) {
  CertificateSpec ca;
  ca.is_ca = true;
  ca.common_name = "CAHICHA Fixture Attestation Root";
  ca.serial = 1;
  attestation_root_ = MakeCertificate(ca, nullptr, rng_);

  ca.common_name = "CAHICHA Fixture Metadata Root";
  ca.serial = 2;
  mds_root_ = MakeCertificate(ca, nullptr, rng_);

  CertificateSpec signer;
  signer.common_name = "CAHICHA Fixture Metadata Signer";
  signer.serial = 3;
  mds_signer_ = MakeCertificate(signer, &mds_root_, rng_);
}

AttestationIdentity FixtureAuthority::IssueAttestationIdentity(const codec::Aaguid& aaguid) const {
  CertificateSpec leaf;
  leaf.common_name = "Fixture Authenticator " + mds::FormatAaguid(aaguid);
  leaf.org_unit = "Authenticator Attestation";
  leaf.aaguid = aaguid;
  leaf.serial = next_serial_++;
  KeyAndCertificate issued = MakeCertificate(leaf, &attestation_root_, rng_);
  AttestationIdentity out;
  out.x5c.push_back(issued.der());
  out.key = std::move(issued.key);
  return out;
}

std::string FixtureAuthority::MdsBlobFor(const std::vector<codec::Aaguid>& aaguids,
                                         const std::string& status) const {
  MdsBlobSpec spec;
  for (const codec::Aaguid& aaguid : aaguids) {
    spec.entries.push_back({aaguid, "Fixture authenticator " + mds::FormatAaguid(aaguid),
                            {attestation_root_.der()}, status});
  }
  return MdsBlob(spec);
}

std::string FixtureAuthority::MdsBlob(const MdsBlobSpec& spec) const {
  return WriteMdsBlob(spec, mds_signer_);
}

}  // namespace cahicha::softauth
