#include "cahicha/codec/base64.h"

#include <array>

#include "cahicha/codec/errors.h"

namespace cahicha::codec {
namespace {

constexpr char kUrlAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr char kStdAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr uint8_t kInvalid = 0xff;

constexpr std::array<uint8_t, 256> ReverseTable(const char* alphabet) {
  std::array<uint8_t, 256> table{};
  for (auto& v : table) v = kInvalid;
  for (uint8_t i = 0; i < 64; ++i) table[static_cast<uint8_t>(alphabet[i])] = i;
  return table;
}

constexpr auto kUrlReverse = ReverseTable(kUrlAlphabet);
constexpr auto kStdReverse = ReverseTable(kStdAlphabet);

std::string Encode(ByteView data, const char* alphabet, bool pad) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  const size_t rest = data.size() - i;
  if (rest == 1) {
    const uint32_t v = data[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    if (pad) out.append("==");
  } else if (rest == 2) {
    const uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    if (pad) out.push_back('=');
  }
  return out;
}

Bytes Decode(std::string_view text, const std::array<uint8_t, 256>& reverse) {
  size_t padding = 0;
  while (!text.empty() && text.back() == '=' && padding < 2) {
    text.remove_suffix(1);
    ++padding;
  }
  if (padding > 0 && (text.size() + padding) % 4 != 0)
    throw CodecError(CodecErrc::kMalformedEncoding, "bad padding");
  if (text.size() % 4 == 1) throw CodecError(CodecErrc::kMalformedEncoding, "impossible length");

  auto sextet = [&](char c) {
    const uint8_t v = reverse[static_cast<uint8_t>(c)];
    if (v == kInvalid) throw CodecError(CodecErrc::kMalformedEncoding, "character outside alphabet");
    return static_cast<uint32_t>(v);
  };

  Bytes out;
  out.reserve(text.size() * 3 / 4);
  size_t i = 0;
  for (; i + 4 <= text.size(); i += 4) {
    const uint32_t v = (sextet(text[i]) << 18) | (sextet(text[i + 1]) << 12) |
                       (sextet(text[i + 2]) << 6) | sextet(text[i + 3]);
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
  }
  const size_t rest = text.size() - i;
  if (rest == 2) {
    const uint32_t v = (sextet(text[i]) << 18) | (sextet(text[i + 1]) << 12);
    if (v & 0xffff) throw CodecError(CodecErrc::kMalformedEncoding, "non-zero trailing bits");
    out.push_back(static_cast<uint8_t>(v >> 16));
  } else if (rest == 3) {
    const uint32_t v =
        (sextet(text[i]) << 18) | (sextet(text[i + 1]) << 12) | (sextet(text[i + 2]) << 6);
    if (v & 0xff) throw CodecError(CodecErrc::kMalformedEncoding, "non-zero trailing bits");
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
  }
  return out;
}

}  // namespace

std::string EncodeBase64Url(ByteView data, Padding padding) {
  return Encode(data, kUrlAlphabet, padding == Padding::kInclude);
}

std::string EncodeBase64(ByteView data) { return Encode(data, kStdAlphabet, true); }

Bytes DecodeBase64Url(std::string_view text) { return Decode(text, kUrlReverse); }

Bytes DecodeBase64(std::string_view text) { return Decode(text, kStdReverse); }

}  // namespace cahicha::codec
