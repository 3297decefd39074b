#ifndef CAHICHA_MDS_TRUST_STORE_H_
#define CAHICHA_MDS_TRUST_STORE_H_

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cahicha/codec/authenticator_data.h"
#include "cahicha/crypto/bytes.h"

namespace cahicha::mds {

using codec::Aaguid;

enum class AuthenticatorStatus { kCertified, kRevoked, kOther };

struct MetadataEntry {
  Aaguid aaguid{};
  std::string description;
  // DER certificates.
  std::vector<Bytes> attestation_root_certificates;
  AuthenticatorStatus status = AuthenticatorStatus::kOther;
  // Latest statusReports[].status, verbatim.
  std::string status_name;
};

// Immutable AAGUID-indexed view of one ingested metadata blob.
class TrustStore {
 public:
  TrustStore() = default;
  TrustStore(std::vector<MetadataEntry> entries, std::chrono::system_clock::time_point loaded_at,
             Sha256Digest source_digest, int64_t serial = 0);

  const MetadataEntry* Find(const Aaguid& aaguid) const;
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::chrono::system_clock::time_point loaded_at() const { return loaded_at_; }
  const Sha256Digest& source_digest() const { return source_digest_; }
  int64_t serial() const { return serial_; }

 private:
  std::map<Aaguid, MetadataEntry> entries_;
  std::chrono::system_clock::time_point loaded_at_{};
  Sha256Digest source_digest_{};
  int64_t serial_ = 0;
};

// Shared handle for request handlers; Replace() swaps in a whole new store.
class TrustStoreHandle {
 public:
  TrustStoreHandle() = default;
  explicit TrustStoreHandle(TrustStore store)
      : current_(std::make_shared<const TrustStore>(std::move(store))) {}

  std::shared_ptr<const TrustStore> Get() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

  void Replace(TrustStore store) {
    auto next = std::make_shared<const TrustStore>(std::move(store));
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const TrustStore> current_;
};

enum class MdsErrc { kBadBlobSignature, kMalformedBlob, kExpiredBlob };

std::string_view MdsErrcName(MdsErrc code);

class MdsError : public std::runtime_error {
 public:
  MdsError(MdsErrc code, const std::string& detail);
  MdsErrc code() const { return code_; }

 private:
  MdsErrc code_;
};

enum class ExpiredBlobPolicy { kWarn, kReject };

struct LoadOptions {
  std::chrono::system_clock::time_point now = std::chrono::system_clock::now();
  ExpiredBlobPolicy expired_blob = ExpiredBlobPolicy::kWarn;
};

struct LoadResult {
  TrustStore store;
  std::vector<std::string> warnings;
};

// Verifies a compact-serialized signed metadata blob (header.payload.sig,
// ES256 or RS256, signing chain in the header's x5c) up to
// |root_certificate| (DER or PEM) and indexes its FIDO2 entries by AAGUID.
// Either the whole blob loads or MdsError is thrown; there is no partial
// result. No network access.
LoadResult LoadMdsBlob(std::string_view blob, ByteView root_certificate,
                       const LoadOptions& options = {});

struct ChainValidation {
  bool trusted = false;
  std::string reason;

  explicit operator bool() const { return trusted; }
};

// True iff |aaguid| is in |store|, its status is not revoked, the leaf
// (x5c[0]) carries no contradicting AAGUID extension, and the chain
// verifies from the leaf to one of the entry's attestation roots at |now|.
ChainValidation ValidateAttestationChain(std::span<const Bytes> x5c, const Aaguid& aaguid,
                                         const TrustStore& store,
                                         std::chrono::system_clock::time_point now);

// "xxxxxxxx-xxxx-xxxx-xxxx-xxxxxxxxxxxx" (case-insensitive) <-> bytes.
std::optional<Aaguid> ParseAaguid(std::string_view text);
std::string FormatAaguid(const Aaguid& aaguid);

}  // namespace cahicha::mds

#endif  // CAHICHA_MDS_TRUST_STORE_H_
