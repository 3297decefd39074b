#include "cahicha/codec/attestation_object.h"

#include "cahicha/codec/cbor.h"
#include "cahicha/codec/errors.h"

namespace cahicha::codec {
namespace {

constexpr char kPacked[] = "packed";
constexpr char kNone[] = "none";

[[noreturn]] void Malformed(const std::string& what) {
  throw CodecError(CodecErrc::kMalformedAttestation, what);
}

AttestationStatement ParsePackedStatement(const cbor::Value& stmt) {
  AttestationStatement out;
  for (const auto& [key, value] : stmt.map()) {
    if (!key.is_text()) Malformed("packed statement key is not text");
    const std::string& name = key.text();
    if (name == "alg") {
      if (!value.is_integer()) Malformed("alg is not an integer");
      out.algorithm = value.integer();
    } else if (name == "sig") {
      if (!value.is_bytes()) Malformed("sig is not a byte string");
      out.signature = value.bytes();
    } else if (name == "x5c") {
      if (!value.is_array() || value.array().empty()) Malformed("x5c must be a non-empty array");
      for (const cbor::Value& cert : value.array()) {
        if (!cert.is_bytes() || cert.bytes().empty()) Malformed("x5c entry is not a certificate");
        out.x5c.push_back(cert.bytes());
      }
    } else {
      Malformed("unexpected packed statement member " + name);
    }
  }
  if (!stmt.Find("alg")) Malformed("packed statement lacks alg");
  if (!stmt.Find("sig") || out.signature.empty()) Malformed("packed statement lacks sig");
  return out;
}

}  // namespace

std::string_view FormatName(AttestationFormat format) {
  return format == AttestationFormat::kPacked ? kPacked : kNone;
}

AttestationEnvelope DecodeAttestationEnvelope(ByteView bytes) {
  const cbor::Value top = cbor::Decode(bytes);
  if (!top.is_map()) Malformed("attestation object is not a map");
  for (const auto& [key, unused] : top.map()) {
    if (!key.is_text() || (key.text() != "fmt" && key.text() != "attStmt" && key.text() != "authData"))
      Malformed("unexpected top-level member");
  }
  const cbor::Value* fmt = top.Find("fmt");
  const cbor::Value* stmt = top.Find("attStmt");
  const cbor::Value* auth_data = top.Find("authData");
  if (!fmt || !fmt->is_text()) Malformed("missing fmt");
  if (!stmt || !stmt->is_map()) Malformed("missing attStmt");
  if (!auth_data || !auth_data->is_bytes()) Malformed("missing authData");

  AttestationEnvelope out;
  if (fmt->text() == kPacked) {
    out.format = AttestationFormat::kPacked;
    out.statement = ParsePackedStatement(*stmt);
  } else if (fmt->text() == kNone) {
    out.format = AttestationFormat::kNone;
    if (!stmt->map().empty()) Malformed("\"none\" statement must be empty");
  } else {
    throw CodecError(CodecErrc::kUnsupportedFormat, fmt->text());
  }
  out.auth_data_bytes = auth_data->bytes();
  return out;
}

AttestationObject DecodeAttestationObject(ByteView bytes) {
  AttestationEnvelope envelope = DecodeAttestationEnvelope(bytes);
  AttestationObject out;
  out.auth_data = ParseAuthenticatorData(envelope.auth_data_bytes);
  out.format = envelope.format;
  out.statement = std::move(envelope.statement);
  out.auth_data_bytes = std::move(envelope.auth_data_bytes);
  return out;
}

Bytes EncodeAttestationObject(AttestationFormat format, const AttestationStatement& statement,
                              ByteView auth_data_bytes) {
  cbor::Value::Map stmt;
  if (format == AttestationFormat::kPacked) {
    stmt.emplace_back("alg", statement.algorithm);
    stmt.emplace_back("sig", statement.signature);
    if (!statement.x5c.empty()) {
      cbor::Value::Array chain;
      for (const Bytes& cert : statement.x5c) chain.emplace_back(cert);
      stmt.emplace_back("x5c", std::move(chain));
    }
  }
  cbor::Value::Map top;
  top.emplace_back("fmt", std::string(FormatName(format)));
  top.emplace_back("attStmt", std::move(stmt));
  top.emplace_back("authData", Bytes(auth_data_bytes.begin(), auth_data_bytes.end()));
  return cbor::Encode(cbor::Value(std::move(top)));
}

}  // namespace cahicha::codec
