#include "cahicha/mds/trust_store.h"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "cahicha/codec/base64.h"
#include "cahicha/codec/errors.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/crypto/keys.h"
#include "cahicha/crypto/x509.h"

namespace cahicha::mds {
namespace {

using nlohmann::json;
using std::chrono::system_clock;

[[noreturn]] void Malformed(const std::string& what) { throw MdsError(MdsErrc::kMalformedBlob, what); }

json ParseSegment(std::string_view segment, const char* name) {
  Bytes raw;
  try {
    raw = codec::DecodeBase64Url(segment);
  } catch (const codec::CodecError&) {
    Malformed(std::string(name) + " is not base64url");
  }
  json doc = json::parse(raw.begin(), raw.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) Malformed(std::string(name) + " is not a JSON object");
  return doc;
}

Bytes DecodeCertificateField(const json& value) {
  if (!value.is_string()) Malformed("certificate entry is not a string");
  try {
    return codec::DecodeBase64(value.get<std::string>());
  } catch (const codec::CodecError&) {
    Malformed("certificate entry is not base64");
  }
}

AuthenticatorStatus StatusFromName(std::string_view name) {
  if (name == "REVOKED" || name == "ATTESTATION_KEY_COMPROMISE" ||
      name == "USER_KEY_REMOTE_COMPROMISE" || name == "USER_KEY_PHYSICAL_COMPROMISE")
    return AuthenticatorStatus::kRevoked;
  if (name.starts_with("FIDO_CERTIFIED")) return AuthenticatorStatus::kCertified;
  return AuthenticatorStatus::kOther;
}

// Picks the report with the latest effectiveDate; later array positions win
// ties. ISO-8601 dates compare correctly as strings.
std::string LatestStatus(const json& entry) {
  auto it = entry.find("statusReports");
  if (it == entry.end()) return {};
  if (!it->is_array()) Malformed("statusReports is not an array");
  std::string best_date;
  std::string best_status;
  bool found = false;
  for (const json& report : *it) {
    if (!report.is_object() || !report.contains("status") || !report["status"].is_string())
      Malformed("status report lacks status");
    std::string date = report.value("effectiveDate", std::string());
    if (!found || date >= best_date) {
      best_date = std::move(date);
      best_status = report["status"].get<std::string>();
      found = true;
    }
  }
  return best_status;
}

std::optional<std::chrono::year_month_day> ParseDate(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m), std::chrono::day(d)};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

}  // namespace

TrustStore::TrustStore(std::vector<MetadataEntry> entries, system_clock::time_point loaded_at,
                       Sha256Digest source_digest, int64_t serial)
    : loaded_at_(loaded_at), source_digest_(source_digest), serial_(serial) {
  for (MetadataEntry& e : entries) {
    const Aaguid key = e.aaguid;
    entries_.insert_or_assign(key, std::move(e));
  }
}

const MetadataEntry* TrustStore::Find(const Aaguid& aaguid) const {
  auto it = entries_.find(aaguid);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string_view MdsErrcName(MdsErrc code) {
  switch (code) {
    case MdsErrc::kBadBlobSignature:
      return "BadBlobSignature";
    case MdsErrc::kMalformedBlob:
      return "MalformedBlob";
    case MdsErrc::kExpiredBlob:
      return "ExpiredBlob";
  }
  return "Unknown";
}

MdsError::MdsError(MdsErrc code, const std::string& detail)
    : std::runtime_error(std::string(MdsErrcName(code)) + ": " + detail), code_(code) {}

std::optional<Aaguid> ParseAaguid(std::string_view text) {
  if (text.size() != 36) return std::nullopt;
  Aaguid out{};
  size_t byte = 0;
  for (size_t i = 0; i < text.size();) {
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (text[i] != '-') return std::nullopt;
      ++i;
      continue;
    }
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      return -1;
    };
    const int hi = nibble(text[i]);
    const int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[byte++] = static_cast<uint8_t>(hi << 4 | lo);
    i += 2;
  }
  return out;
}

std::string FormatAaguid(const Aaguid& aaguid) {
  const std::string hex = HexEncode(aaguid);
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
         hex.substr(16, 4) + "-" + hex.substr(20);
}

LoadResult LoadMdsBlob(std::string_view blob, ByteView root_certificate,
                       const LoadOptions& options) {
  while (!blob.empty() && std::isspace(static_cast<unsigned char>(blob.back())))
    blob.remove_suffix(1);
  const size_t dot1 = blob.find('.');
  const size_t dot2 = dot1 == std::string_view::npos ? dot1 : blob.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos || blob.find('.', dot2 + 1) != std::string_view::npos)
    Malformed("blob is not three dot-separated segments");
  const std::string_view header_b64 = blob.substr(0, dot1);
  const std::string_view payload_b64 = blob.substr(dot1 + 1, dot2 - dot1 - 1);
  const std::string_view signature_b64 = blob.substr(dot2 + 1);

  const json header = ParseSegment(header_b64, "header");
  const std::string alg = header.value("alg", std::string());
  if (alg != "ES256" && alg != "RS256") Malformed("unsupported blob algorithm '" + alg + "'");
  auto x5c_it = header.find("x5c");
  if (x5c_it == header.end() || !x5c_it->is_array() || x5c_it->empty())
    Malformed("header lacks x5c chain");

  std::vector<crypto::X509Ptr> chain;
  for (const json& cert : *x5c_it) {
    crypto::X509Ptr parsed = crypto::ParseCertificateDer(DecodeCertificateField(cert));
    if (!parsed) Malformed("x5c entry is not a DER certificate");
    chain.push_back(std::move(parsed));
  }
  crypto::X509Ptr root = crypto::ParseCertificate(root_certificate);
  if (!root) Malformed("root certificate does not parse");

  Bytes signature;
  try {
    signature = codec::DecodeBase64Url(signature_b64);
  } catch (const codec::CodecError&) {
    throw MdsError(MdsErrc::kBadBlobSignature, "signature is not base64url");
  }

  std::vector<X509*> intermediates;
  for (size_t i = 1; i < chain.size(); ++i) intermediates.push_back(chain[i].get());
  X509* anchors[] = {root.get()};
  const crypto::ChainCheck chain_check =
      crypto::VerifyCertificateChain(chain[0].get(), intermediates, anchors, options.now);
  if (!chain_check.ok)
    throw MdsError(MdsErrc::kBadBlobSignature, "signing chain: " + chain_check.reason);

  const crypto::EvpPkeyPtr signer = crypto::CertificatePublicKey(chain[0].get());
  const ByteView signed_part = AsBytes(blob.substr(0, dot2));
  bool signature_ok = false;
  if (alg == "ES256") {
    const Bytes der = crypto::EcdsaRawToDer(signature);
    signature_ok = !der.empty() && crypto::VerifyEs256(signer.get(), signed_part, der);
  } else {
    signature_ok = crypto::VerifyRs256(signer.get(), signed_part, signature);
  }
  if (!signature_ok) throw MdsError(MdsErrc::kBadBlobSignature, "signature does not verify");

  const json payload = ParseSegment(payload_b64, "payload");
  auto entries_it = payload.find("entries");
  if (entries_it == payload.end() || !entries_it->is_array()) Malformed("payload lacks entries");

  LoadResult result;
  std::vector<MetadataEntry> entries;
  for (const json& raw : *entries_it) {
    if (!raw.is_object()) Malformed("entry is not an object");
    // U2F-only entries are keyed by certificate key identifiers instead.
    if (!raw.contains("aaguid")) continue;
    if (!raw["aaguid"].is_string()) Malformed("aaguid is not a string");
    std::optional<Aaguid> aaguid = ParseAaguid(raw["aaguid"].get<std::string>());
    if (!aaguid) Malformed("bad aaguid '" + raw["aaguid"].get<std::string>() + "'");

    MetadataEntry entry;
    entry.aaguid = *aaguid;
    auto statement = raw.find("metadataStatement");
    if (statement == raw.end() || !statement->is_object())
      Malformed("entry lacks metadataStatement");
    entry.description = statement->value("description", std::string());
    auto roots = statement->find("attestationRootCertificates");
    if (roots != statement->end()) {
      if (!roots->is_array()) Malformed("attestationRootCertificates is not an array");
      for (const json& cert : *roots) {
        Bytes der = DecodeCertificateField(cert);
        if (!crypto::ParseCertificateDer(der)) Malformed("attestation root does not parse");
        entry.attestation_root_certificates.push_back(std::move(der));
      }
    }
    entry.status_name = LatestStatus(raw);
    entry.status = StatusFromName(entry.status_name);
    entries.push_back(std::move(entry));
  }

  if (auto next = payload.find("nextUpdate"); next != payload.end()) {
    if (!next->is_string()) Malformed("nextUpdate is not a string");
    const std::optional<std::chrono::year_month_day> date = ParseDate(next->get<std::string>());
    if (!date) Malformed("nextUpdate is not a date");
    const auto today = std::chrono::floor<std::chrono::days>(options.now);
    if (std::chrono::sys_days(*date) < today) {
      const std::string msg = "blob nextUpdate " + next->get<std::string>() + " is in the past";
      if (options.expired_blob == ExpiredBlobPolicy::kReject)
        throw MdsError(MdsErrc::kExpiredBlob, msg);
      result.warnings.push_back(msg);
    }
  }

  const int64_t serial = payload.contains("no") && payload["no"].is_number_integer()
                             ? payload["no"].get<int64_t>()
                             : 0;
  result.store = TrustStore(std::move(entries), options.now, crypto::Sha256(AsBytes(blob)), serial);
  return result;
}

ChainValidation ValidateAttestationChain(std::span<const Bytes> x5c, const Aaguid& aaguid,
                                         const TrustStore& store,
                                         std::chrono::system_clock::time_point now) {
  if (x5c.empty()) return {false, "no attestation certificate chain"};
  const MetadataEntry* entry = store.Find(aaguid);
  if (!entry) return {false, "aaguid " + FormatAaguid(aaguid) + " not in metadata"};
  if (entry->status == AuthenticatorStatus::kRevoked)
    return {false, "authenticator status " + entry->status_name};

  std::vector<crypto::X509Ptr> chain;
  for (const Bytes& der : x5c) {
    crypto::X509Ptr cert = crypto::ParseCertificateDer(der);
    if (!cert) return {false, "x5c entry does not parse"};
    chain.push_back(std::move(cert));
  }
  if (std::optional<Aaguid> cert_aaguid = crypto::CertificateAaguid(chain[0].get());
      cert_aaguid && *cert_aaguid != aaguid)
    return {false, "attestation certificate aaguid differs from authenticator data"};

  std::vector<crypto::X509Ptr> roots;
  std::vector<X509*> anchors;
  for (const Bytes& der : entry->attestation_root_certificates) {
    crypto::X509Ptr root = crypto::ParseCertificateDer(der);
    if (!root) continue;
    anchors.push_back(root.get());
    roots.push_back(std::move(root));
  }
  if (anchors.empty()) return {false, "metadata entry has no attestation roots"};

  std::vector<X509*> intermediates;
  for (size_t i = 1; i < chain.size(); ++i) intermediates.push_back(chain[i].get());
  const crypto::ChainCheck check =
      crypto::VerifyCertificateChain(chain[0].get(), intermediates, anchors, now);
  if (!check.ok) return {false, "chain: " + check.reason};
  return {true, {}};
}

}  // namespace cahicha::mds
