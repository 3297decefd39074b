#ifndef CAHICHA_CODEC_AUTHENTICATOR_DATA_H_
#define CAHICHA_CODEC_AUTHENTICATOR_DATA_H_

#include <array>
#include <cstdint>
#include <optional>

#include "cahicha/codec/cose_key.h"
#include "cahicha/crypto/bytes.h"

namespace cahicha::codec {

using Aaguid = std::array<uint8_t, 16>;

// Fixed-size prefix: RP ID hash, flags byte, signature counter.
inline constexpr size_t kAuthenticatorDataMinSize = 32 + 1 + 4;
// Prefix plus AAGUID and the credential-id length field.
inline constexpr size_t kAttestedDataMinSize = kAuthenticatorDataMinSize + 16 + 2;
inline constexpr size_t kMaxCredentialIdLength = 1023;

class FlagSet {
 public:
  static constexpr uint8_t kUserPresent = 0x01;
  static constexpr uint8_t kUserVerified = 0x04;
  static constexpr uint8_t kAttestedCredential = 0x40;
  static constexpr uint8_t kExtensionData = 0x80;

  constexpr FlagSet() = default;
  constexpr explicit FlagSet(uint8_t raw) : raw_(raw) {}

  constexpr uint8_t raw() const { return raw_; }
  constexpr bool up() const { return raw_ & kUserPresent; }
  constexpr bool uv() const { return raw_ & kUserVerified; }
  constexpr bool at() const { return raw_ & kAttestedCredential; }
  constexpr bool ed() const { return raw_ & kExtensionData; }

  friend constexpr bool operator==(FlagSet, FlagSet) = default;

 private:
  uint8_t raw_ = 0;
};

struct AttestedCredentialData {
  Aaguid aaguid{};
  Bytes credential_id;
  CosePublicKey public_key;
  // The key exactly as it appeared on the wire.
  Bytes public_key_cbor;
};

struct AuthenticatorData {
  Sha256Digest rp_id_hash{};
  FlagSet flags;
  uint32_t sign_count = 0;
  std::optional<AttestedCredentialData> attested_credential;
  // Raw bytes following the attested credential data when the ED flag is
  // set. Kept only so Serialize() reproduces the input; never interpreted.
  Bytes extensions;

  bool extensions_present() const { return flags.ed(); }

  Bytes Serialize() const;
};

// Throws CodecError: kTruncatedInput when shorter than the layout requires
// (including a credential length that overruns the buffer),
// kMalformedCredentialData for a bad credential section, kTrailingData for
// unexplained bytes when ED is clear, plus any DecodeCoseKey error.
AuthenticatorData ParseAuthenticatorData(ByteView bytes);

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_AUTHENTICATOR_DATA_H_
