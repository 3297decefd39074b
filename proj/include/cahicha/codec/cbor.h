#ifndef CAHICHA_CODEC_CBOR_H_
#define CAHICHA_CODEC_CBOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cahicha/crypto/bytes.h"

namespace cahicha::cbor {

// The subset of CBOR (RFC 8949) that WebAuthn uses: integers that fit in
// int64, byte and text strings, arrays, maps, booleans and null. Floats,
// tags and indefinite-length items are rejected.
class Value {
 public:
  enum class Type { kInteger, kBytes, kText, kArray, kMap, kBool, kNull };

  using Array = std::vector<Value>;
  // Maps keep wire order so re-encoding reproduces the input.
  using Map = std::vector<std::pair<Value, Value>>;

  Value() : data_(nullptr) {}
  Value(int64_t v) : data_(v) {}
  Value(int v) : data_(static_cast<int64_t>(v)) {}
  Value(Bytes v) : data_(std::move(v)) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(Array v) : data_(std::move(v)) {}
  Value(Map v) : data_(std::move(v)) {}
  Value(bool v) : data_(v) {}

  Type type() const { return static_cast<Type>(data_.index()); }
  bool is_integer() const { return type() == Type::kInteger; }
  bool is_bytes() const { return type() == Type::kBytes; }
  bool is_text() const { return type() == Type::kText; }
  bool is_array() const { return type() == Type::kArray; }
  bool is_map() const { return type() == Type::kMap; }

  // Accessors throw std::bad_variant_access on type mismatch.
  int64_t integer() const { return std::get<int64_t>(data_); }
  const Bytes& bytes() const { return std::get<Bytes>(data_); }
  const std::string& text() const { return std::get<std::string>(data_); }
  const Array& array() const { return std::get<Array>(data_); }
  const Map& map() const { return std::get<Map>(data_); }
  bool boolean() const { return std::get<bool>(data_); }

  // Map lookup; nullptr when absent or when this is not a map.
  const Value* Find(int64_t key) const;
  const Value* Find(std::string_view key) const;

  friend bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }

 private:
  std::variant<int64_t, Bytes, std::string, Array, Map, bool, std::nullptr_t> data_;
};

// Decodes exactly one item spanning all of |data|. Non-minimal heads,
// duplicate map keys and nesting deeper than 16 are malformed. Throws
// codec::CodecError(kMalformedCbor).
Value Decode(ByteView data);

// Decodes one item from the front of |data| and reports how many bytes it
// occupied; trailing bytes are left to the caller.
Value DecodePrefix(ByteView data, size_t* consumed);

// Encodes with minimal-length heads.
Bytes Encode(const Value& value);

}  // namespace cahicha::cbor

#endif  // CAHICHA_CODEC_CBOR_H_
