// Writes golden soft-authenticator responses and a development PKI
// (TLS certificate, metadata blob and root, attestation identity).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cahicha/codec/attestation_object.h"
#include "cahicha/codec/base64.h"
#include "cahicha/codec/cbor.h"
#include "cahicha/crypto/digest.h"
#include "cahicha/engine/creation_options.h"
#include "cahicha/mds/trust_store.h"
#include "cahicha/softauth/fixture_pki.h"
#include "cahicha/softauth/soft_authenticator.h"

namespace {

namespace fs = std::filesystem;
using namespace cahicha;

void WriteFile(const fs::path& path, std::string_view content, bool secret = false) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (secret) fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write);
  std::cout << "wrote " << path.string() << "\n";
}

engine::CreationOptions GoldenOptions() {
  Bytes challenge(32);
  for (size_t i = 0; i < challenge.size(); ++i) challenge[i] = static_cast<uint8_t>(i);
  engine::CreationOptions o;
  o.challenge = codec::EncodeBase64Url(challenge);
  o.rp_id = "localhost";
  o.rp_name = "CAHICHA";
  o.user_id = codec::EncodeBase64Url(Bytes(16, 0xab));
  o.user_name = "visitor";
  o.user_display_name = "Visitor";
  o.pub_key_cred_params = {-7, -257};
  o.user_verification = "required";
  o.attestation = "direct";
  o.timeout_ms = 120000;
  return o;
}

nlohmann::json Golden(const std::string& name, softauth::AttestationMode mode, uint64_t seed) {
  const engine::CreationOptions options = GoldenOptions();
  const std::string origin = "https://localhost";
  softauth::AuthenticatorBehavior behavior;
  behavior.attestation = mode;
  behavior.sign_count_start = 1;
  softauth::SoftAuthenticator authenticator(seed);
  const engine::AttestationResponse response =
      authenticator.CreateCredential(options, origin, behavior, "golden-" + name);

  const codec::AttestationObject obj = codec::DecodeAttestationObject(response.attestation_object);
  const codec::AttestedCredentialData& cred = *obj.auth_data.attested_credential;
  return {
      {"seed", seed},
      {"attestation", name},
      {"origin", origin},
      {"options", options.ToJson()},
      {"response", softauth::ResponseToJson(response)},
      {"expect",
       {{"rp_id_hash", HexEncode(obj.auth_data.rp_id_hash)},
        {"flags", obj.auth_data.flags.raw()},
        {"sign_count", obj.auth_data.sign_count},
        {"credential_id", HexEncode(cred.credential_id)},
        {"x", HexEncode(cred.public_key.point.x)},
        {"y", HexEncode(cred.public_key.point.y)},
        {"signature", HexEncode(obj.statement.signature)}}},
  };
}

void WriteGolden(const fs::path& dir) {
  fs::create_directories(dir);
  WriteFile(dir / "golden_packed_self.json",
            Golden("packed-self", softauth::AttestationMode::kPackedSelf, 1).dump(2) + "\n");
  WriteFile(dir / "golden_none.json",
            Golden("none", softauth::AttestationMode::kNone, 2).dump(2) + "\n");
}

void WriteDevPki(const fs::path& dir, const std::string& aaguid_text, const std::string& status) {
  const std::optional<codec::Aaguid> aaguid = mds::ParseAaguid(aaguid_text);
  if (!aaguid) throw std::runtime_error("bad aaguid " + aaguid_text);
  fs::create_directories(dir);

  const softauth::KeyAndCertificate tls = softauth::MakeLocalhostTlsCertificate();
  WriteFile(dir / "tls.crt", tls.pem());
  WriteFile(dir / "tls.key", tls.private_key_pem(), true);

  const softauth::FixtureAuthority authority;
  WriteFile(dir / "mds_root.pem", authority.mds_root().pem());
  WriteFile(dir / "attestation_root.pem", authority.attestation_root().pem());
  WriteFile(dir / "mds.jwt", authority.MdsBlobFor({*aaguid}, status));

  const softauth::AttestationIdentity identity = authority.IssueAttestationIdentity(*aaguid);
  WriteFile(dir / "attestation.pem", softauth::AttestationChainPem(identity));
  WriteFile(dir / "attestation.key", softauth::PrivateKeyPem(identity.key.get()), true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cahicha-fixtures: test and development fixtures"};
  app.require_subcommand(1);

  std::string golden_out = "tests/fixtures";
  CLI::App* golden = app.add_subcommand("golden", "golden soft-authenticator responses");
  golden->add_option("--out", golden_out, "output directory")->capture_default_str();

  std::string pki_out = "dev";
  std::string aaguid = "ca41c4a0-0001-4000-8000-000000000001";
  std::string status = "FIDO_CERTIFIED_L1";
  CLI::App* pki = app.add_subcommand("dev-pki", "TLS certificate, metadata blob and attestation identity");
  pki->add_option("--out", pki_out, "output directory")->capture_default_str();
  pki->add_option("--aaguid", aaguid, "AAGUID registered in the blob")->capture_default_str();
  pki->add_option("--status", status, "status report for the entry")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*golden) WriteGolden(golden_out);
    if (*pki) WriteDevPki(pki_out, aaguid, status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
