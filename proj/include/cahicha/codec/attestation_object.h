#ifndef CAHICHA_CODEC_ATTESTATION_OBJECT_H_
#define CAHICHA_CODEC_ATTESTATION_OBJECT_H_

#include <optional>
#include <string>
#include <vector>

#include "cahicha/codec/authenticator_data.h"
#include "cahicha/crypto/bytes.h"

namespace cahicha::codec {

// Supported statement formats. Others (fido-u2f, tpm, android-key, ...)
// are rejected with kUnsupportedFormat; a new format needs a case here and
// a branch in the verification engine.
enum class AttestationFormat { kPacked, kNone };

std::string_view FormatName(AttestationFormat format);

struct AttestationStatement {
  // Present for "packed" only.
  int64_t algorithm = 0;
  Bytes signature;
  // DER certificates, leaf first. Empty for self attestation.
  std::vector<Bytes> x5c;
};

// fmt, attStmt and the still-unparsed authData bytes.
struct AttestationEnvelope {
  AttestationFormat format = AttestationFormat::kNone;
  AttestationStatement statement;
  Bytes auth_data_bytes;
};

struct AttestationObject {
  AttestationFormat format = AttestationFormat::kNone;
  AttestationStatement statement;
  // Verbatim, for signature checks.
  Bytes auth_data_bytes;
  AuthenticatorData auth_data;
};

// Throws CodecError: kMalformedCbor, kMalformedAttestation (wrong top-level
// shape or statement members), kUnsupportedFormat, or any
// ParseAuthenticatorData error.
// Checks the CBOR structure and statement but leaves authData unparsed.
AttestationEnvelope DecodeAttestationEnvelope(ByteView bytes);

AttestationObject DecodeAttestationObject(ByteView bytes);

Bytes EncodeAttestationObject(AttestationFormat format, const AttestationStatement& statement,
                              ByteView auth_data_bytes);

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_ATTESTATION_OBJECT_H_
