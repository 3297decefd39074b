#ifndef CAHICHA_CODEC_CLIENT_DATA_H_
#define CAHICHA_CODEC_CLIENT_DATA_H_

#include <string>

#include "cahicha/crypto/bytes.h"

namespace cahicha::codec {

inline constexpr char kCreateCeremonyType[] = "webauthn.create";

struct ClientData {
  std::string ceremony_type;
  // base64url, exactly as echoed by the browser.
  std::string challenge;
  std::string origin;
  // Hashing always happens over these bytes, never over re-serialized JSON.
  Bytes raw_bytes;

  Sha256Digest Hash() const;
};

// Throws CodecError(kMalformedClientData) for invalid JSON or missing
// members, CodecError(kWrongCeremonyType) when type is not webauthn.create.
ClientData ParseClientData(ByteView bytes);

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_CLIENT_DATA_H_
