#include "cahicha/codec/cbor.h"

#include <limits>

#include "cahicha/codec/errors.h"

namespace cahicha::cbor {
namespace {

using codec::CodecErrc;
using codec::CodecError;

constexpr int kMaxDepth = 16;

enum MajorType : uint8_t {
  kUnsigned = 0,
  kNegative = 1,
  kByteString = 2,
  kTextString = 3,
  kArrayType = 4,
  kMapType = 5,
  kTag = 6,
  kSimple = 7,
};

[[noreturn]] void Fail(const std::string& what) {
  throw CodecError(CodecErrc::kMalformedCbor, what);
}

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  size_t offset() const { return pos_; }

  Value ReadItem(int depth) {
    if (depth > kMaxDepth) Fail("nesting too deep");
    const uint8_t initial = ReadByte();
    const uint8_t major = initial >> 5;
    const uint8_t info = initial & 0x1f;

    if (major == kSimple) {
      switch (info) {
        case 20:
          return Value(false);
        case 21:
          return Value(true);
        case 22:
          return Value();
        default:
          Fail("unsupported simple value or float");
      }
    }
    if (major == kTag) Fail("tags are not supported");

    const uint64_t arg = ReadArgument(info);
    switch (major) {
      case kUnsigned:
        if (arg > static_cast<uint64_t>(std::numeric_limits<int64_t>::max()))
          Fail("integer out of range");
        return Value(static_cast<int64_t>(arg));
      case kNegative:
        if (arg > static_cast<uint64_t>(std::numeric_limits<int64_t>::max()))
          Fail("integer out of range");
        return Value(-1 - static_cast<int64_t>(arg));
      case kByteString: {
        ByteView b = ReadSpan(arg);
        return Value(Bytes(b.begin(), b.end()));
      }
      case kTextString: {
        ByteView b = ReadSpan(arg);
        return Value(std::string(b.begin(), b.end()));
      }
      case kArrayType: {
        // Each element needs at least one byte.
        if (arg > Remaining()) Fail("array length exceeds input");
        Value::Array items;
        items.reserve(arg);
        for (uint64_t i = 0; i < arg; ++i) items.push_back(ReadItem(depth + 1));
        return Value(std::move(items));
      }
      case kMapType: {
        if (arg > Remaining() / 2) Fail("map length exceeds input");
        Value::Map entries;
        entries.reserve(arg);
        for (uint64_t i = 0; i < arg; ++i) {
          Value key = ReadItem(depth + 1);
          if (!key.is_integer() && !key.is_text()) Fail("map key must be integer or text");
          for (const auto& [existing, unused] : entries) {
            if (existing == key) Fail("duplicate map key");
          }
          Value value = ReadItem(depth + 1);
          entries.emplace_back(std::move(key), std::move(value));
        }
        return Value(std::move(entries));
      }
    }
    Fail("unreachable major type");
  }

 private:
  size_t Remaining() const { return data_.size() - pos_; }

  uint8_t ReadByte() {
    if (pos_ >= data_.size()) Fail("unexpected end of input");
    return data_[pos_++];
  }

  ByteView ReadSpan(uint64_t n) {
    if (n > Remaining()) Fail("string length exceeds input");
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  uint64_t ReadArgument(uint8_t info) {
    if (info < 24) return info;
    int width = 0;
    switch (info) {
      case 24:
        width = 1;
        break;
      case 25:
        width = 2;
        break;
      case 26:
        width = 4;
        break;
      case 27:
        width = 8;
        break;
      default:
        Fail("indefinite length or reserved additional info");
    }
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | ReadByte();
    // Minimal-encoding rule: each width must be needed.
    const uint64_t lower_bound = width == 1 ? 24 : (uint64_t{1} << (8 * (width / 2)));
    if (v < lower_bound) Fail("non-minimal argument encoding");
    return v;
  }

  ByteView data_;
  size_t pos_ = 0;
};

void WriteHead(Bytes& out, uint8_t major, uint64_t arg) {
  const uint8_t m = static_cast<uint8_t>(major << 5);
  if (arg < 24) {
    out.push_back(m | static_cast<uint8_t>(arg));
    return;
  }
  int width;
  uint8_t info;
  if (arg <= 0xff) {
    width = 1;
    info = 24;
  } else if (arg <= 0xffff) {
    width = 2;
    info = 25;
  } else if (arg <= 0xffffffffu) {
    width = 4;
    info = 26;
  } else {
    width = 8;
    info = 27;
  }
  out.push_back(m | info);
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>(arg >> (8 * i)));
}

void EncodeInto(Bytes& out, const Value& v) {
  switch (v.type()) {
    case Value::Type::kInteger: {
      const int64_t i = v.integer();
      if (i >= 0)
        WriteHead(out, kUnsigned, static_cast<uint64_t>(i));
      else
        WriteHead(out, kNegative, static_cast<uint64_t>(-1 - i));
      return;
    }
    case Value::Type::kBytes:
      WriteHead(out, kByteString, v.bytes().size());
      out.insert(out.end(), v.bytes().begin(), v.bytes().end());
      return;
    case Value::Type::kText:
      WriteHead(out, kTextString, v.text().size());
      out.insert(out.end(), v.text().begin(), v.text().end());
      return;
    case Value::Type::kArray:
      WriteHead(out, kArrayType, v.array().size());
      for (const Value& item : v.array()) EncodeInto(out, item);
      return;
    case Value::Type::kMap:
      WriteHead(out, kMapType, v.map().size());
      for (const auto& [key, value] : v.map()) {
        EncodeInto(out, key);
        EncodeInto(out, value);
      }
      return;
    case Value::Type::kBool:
      out.push_back(v.boolean() ? 0xf5 : 0xf4);
      return;
    case Value::Type::kNull:
      out.push_back(0xf6);
      return;
  }
}

}  // namespace

const Value* Value::Find(int64_t key) const {
  if (!is_map()) return nullptr;
  for (const auto& [k, v] : map()) {
    if (k.is_integer() && k.integer() == key) return &v;
  }
  return nullptr;
}

const Value* Value::Find(std::string_view key) const {
  if (!is_map()) return nullptr;
  for (const auto& [k, v] : map()) {
    if (k.is_text() && k.text() == key) return &v;
  }
  return nullptr;
}

Value DecodePrefix(ByteView data, size_t* consumed) {
  Reader reader(data);
  Value v = reader.ReadItem(0);
  *consumed = reader.offset();
  return v;
}

Value Decode(ByteView data) {
  size_t consumed = 0;
  Value v = DecodePrefix(data, &consumed);
  if (consumed != data.size()) Fail("trailing bytes after item");
  return v;
}

Bytes Encode(const Value& value) {
  Bytes out;
  EncodeInto(out, value);
  return out;
}

}  // namespace cahicha::cbor
