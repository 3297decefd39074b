#include "cahicha/codec/client_data.h"

#include <nlohmann/json.hpp>

#include "cahicha/codec/errors.h"
#include "cahicha/crypto/digest.h"

namespace cahicha::codec {

Sha256Digest ClientData::Hash() const { return crypto::Sha256(raw_bytes); }

ClientData ParseClientData(ByteView bytes) {
  nlohmann::json doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr,
                                             /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    throw CodecError(CodecErrc::kMalformedClientData, "client data is not a JSON object");

  auto member = [&](const char* name) -> std::string {
    auto it = doc.find(name);
    if (it == doc.end() || !it->is_string())
      throw CodecError(CodecErrc::kMalformedClientData, std::string("missing ") + name);
    return it->get<std::string>();
  };

  ClientData out;
  out.ceremony_type = member("type");
  out.challenge = member("challenge");
  out.origin = member("origin");
  if (out.ceremony_type != kCreateCeremonyType)
    throw CodecError(CodecErrc::kWrongCeremonyType, out.ceremony_type);
  out.raw_bytes.assign(bytes.begin(), bytes.end());
  return out;
}

}  // namespace cahicha::codec
