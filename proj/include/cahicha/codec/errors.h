#ifndef CAHICHA_CODEC_ERRORS_H_
#define CAHICHA_CODEC_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cahicha::codec {

enum class CodecErrc {
  kMalformedEncoding,
  kTruncatedInput,
  kTrailingData,
  kMalformedCredentialData,
  kMalformedClientData,
  kWrongCeremonyType,
  kMalformedCbor,
  kMalformedAttestation,
  kUnsupportedFormat,
  kUnsupportedAlgorithm,
  kMalformedKey,
};

std::string_view ErrcName(CodecErrc code);

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrc code, const std::string& detail);

  CodecErrc code() const { return code_; }

 private:
  CodecErrc code_;
};

}  // namespace cahicha::codec

#endif  // CAHICHA_CODEC_ERRORS_H_
