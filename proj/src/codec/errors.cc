#include "cahicha/codec/errors.h"

namespace cahicha::codec {

std::string_view ErrcName(CodecErrc code) {
  switch (code) {
    case CodecErrc::kMalformedEncoding:
      return "MalformedEncoding";
    case CodecErrc::kTruncatedInput:
      return "TruncatedInput";
    case CodecErrc::kTrailingData:
      return "TrailingData";
    case CodecErrc::kMalformedCredentialData:
      return "MalformedCredentialData";
    case CodecErrc::kMalformedClientData:
      return "MalformedClientData";
    case CodecErrc::kWrongCeremonyType:
      return "WrongCeremonyType";
    case CodecErrc::kMalformedCbor:
      return "MalformedCbor";
    case CodecErrc::kMalformedAttestation:
      return "MalformedAttestation";
    case CodecErrc::kUnsupportedFormat:
      return "UnsupportedFormat";
    case CodecErrc::kUnsupportedAlgorithm:
      return "UnsupportedAlgorithm";
    case CodecErrc::kMalformedKey:
      return "MalformedKey";
  }
  return "Unknown";
}

CodecError::CodecError(CodecErrc code, const std::string& detail)
    : std::runtime_error(std::string(ErrcName(code)) + ": " + detail), code_(code) {}

}  // namespace cahicha::codec
