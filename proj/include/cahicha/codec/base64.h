#ifndef CAHICHA_CODEC_BASE64_H_
#define CAHICHA_CODEC_BASE64_H_

#include <string>
#include <string_view>

#include "cahicha/crypto/bytes.h"

namespace cahicha::codec {

enum class Padding { kOmit, kInclude };

// URL-safe alphabet (RFC 4648 section 5). WebAuthn JSON transport omits
// padding; Fernet containers include it.
std::string EncodeBase64Url(ByteView data, Padding padding = Padding::kOmit);

// Standard alphabet, always padded (certificate fields in MDS payloads).
std::string EncodeBase64(ByteView data);

// Decoders accept input with or without trailing '=' padding. They reject
// characters outside the alphabet, impossible lengths, and non-canonical
// encodings whose unused trailing bits are not zero. Throws
// CodecError(kMalformedEncoding).
Bytes DecodeBase64Url(std::string_view text);
Bytes DecodeBase64(std::string_view text);

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_BASE64_H_
