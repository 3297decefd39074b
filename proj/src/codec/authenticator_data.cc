#include "cahicha/codec/authenticator_data.h"

#include <algorithm>

#include "cahicha/codec/cbor.h"
#include "cahicha/codec/errors.h"

namespace cahicha::codec {

Bytes AuthenticatorData::Serialize() const {
  Bytes out(rp_id_hash.begin(), rp_id_hash.end());
  out.push_back(flags.raw());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(sign_count >> shift));
  if (attested_credential) {
    const AttestedCredentialData& cred = *attested_credential;
    out.insert(out.end(), cred.aaguid.begin(), cred.aaguid.end());
    out.push_back(static_cast<uint8_t>(cred.credential_id.size() >> 8));
    out.push_back(static_cast<uint8_t>(cred.credential_id.size()));
    out.insert(out.end(), cred.credential_id.begin(), cred.credential_id.end());
    if (!cred.public_key_cbor.empty()) {
      out.insert(out.end(), cred.public_key_cbor.begin(), cred.public_key_cbor.end());
    } else {
      const Bytes key = cbor::Encode(cred.public_key.ToCbor());
      out.insert(out.end(), key.begin(), key.end());
    }
  }
  out.insert(out.end(), extensions.begin(), extensions.end());
  return out;
}

AuthenticatorData ParseAuthenticatorData(ByteView bytes) {
  if (bytes.size() < kAuthenticatorDataMinSize)
    throw CodecError(CodecErrc::kTruncatedInput,
                     "authenticator data is " + std::to_string(bytes.size()) + " bytes");

  AuthenticatorData out;
  std::copy_n(bytes.begin(), 32, out.rp_id_hash.begin());
  out.flags = FlagSet(bytes[32]);
  out.sign_count = (uint32_t{bytes[33]} << 24) | (uint32_t{bytes[34]} << 16) |
                   (uint32_t{bytes[35]} << 8) | uint32_t{bytes[36]};
  ByteView rest = bytes.subspan(kAuthenticatorDataMinSize);

  if (out.flags.at()) {
    if (bytes.size() < kAttestedDataMinSize)
      throw CodecError(CodecErrc::kTruncatedInput, "attested credential data header cut short");
    AttestedCredentialData cred;
    std::copy_n(rest.begin(), 16, cred.aaguid.begin());
    const size_t id_len = (size_t{rest[16]} << 8) | rest[17];
    rest = rest.subspan(18);
    if (id_len > kMaxCredentialIdLength)
      throw CodecError(CodecErrc::kMalformedCredentialData, "credential id too long");
    if (id_len > rest.size())
      throw CodecError(CodecErrc::kTruncatedInput, "credential id overruns buffer");
    cred.credential_id.assign(rest.begin(), rest.begin() + id_len);
    rest = rest.subspan(id_len);

    size_t key_len = 0;
    cbor::Value key_map;
    try {
      key_map = cbor::DecodePrefix(rest, &key_len);
    } catch (const CodecError& e) {
      throw CodecError(CodecErrc::kMalformedCredentialData,
                       std::string("credential public key: ") + e.what());
    }
    cred.public_key = DecodeCoseKey(key_map);
    cred.public_key_cbor.assign(rest.begin(), rest.begin() + key_len);
    rest = rest.subspan(key_len);
    out.attested_credential = std::move(cred);
  }

  if (!rest.empty()) {
    if (!out.flags.ed())
      throw CodecError(CodecErrc::kTrailingData,
                       std::to_string(rest.size()) + " bytes after authenticator data");
    out.extensions.assign(rest.begin(), rest.end());
  }
  return out;
}

}  // namespace cahicha::codec
