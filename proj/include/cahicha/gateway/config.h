#ifndef CAHICHA_GATEWAY_CONFIG_H_
#define CAHICHA_GATEWAY_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cahicha/engine/policy.h"

namespace cahicha::gateway {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HostPort {
  std::string host;
  int port = 0;
};

// "host:port", "[v6]:port" or a URL "scheme://host[:port][/...]". Throws
// ConfigError.
HostPort ParseHostPort(std::string_view text, int default_port);

struct GatewayConfig {
  std::string listen_address = "127.0.0.1:8443";
  // Bare host:port means http.
  std::string upstream_origin = "http://127.0.0.1:8080";
  std::string tls_cert_path;
  std::string tls_key_path;
  // Plaintext listener, loopback only.
  bool unsafe_no_tls = false;

  engine::Mode mode = engine::Mode::kGeneral;
  std::string rp_id = "localhost";
  std::string rp_name = "CAHICHA";
  // Empty means https://<rp_id>[:<listen port>].
  std::vector<std::string> expected_origins;
  std::optional<bool> require_uv;
  int64_t challenge_ttl_seconds = 120;

  std::string cookie_name = "cahicha_token";
  std::string token_key_path = "cahicha_token.key";
  int64_t token_max_age_hours = 24;

  std::string mds_blob_path;
  std::string mds_root_path;
  bool mds_reject_expired = false;

  int64_t upstream_timeout_seconds = 30;
  int64_t worker_threads = 128;
  // "-" is stdout; empty disables the log.
  std::string access_log_path = "-";
  // Replaces the built-in challenge script when set.
  std::string ui_bundle_path;

  std::vector<std::string> EffectiveOrigins() const;
  std::string UpstreamUrl() const;
  engine::VerificationPolicy Policy() const;

  // Throws ConfigError for inconsistent settings.
  void Validate() const;
};

// Applies `key = value` lines (TOML subset: strings, integers, booleans and
// string arrays; '#' comments). Unknown keys are errors.
void ApplyConfigText(GatewayConfig& config, std::string_view text);
void ApplyConfigFile(GatewayConfig& config, const std::filesystem::path& path);

// CAHICHA_<KEY> variables, e.g. CAHICHA_MODE=strict. Lists are
// comma-separated.
void ApplyEnvironment(GatewayConfig& config,
                      const std::function<const char*(const char*)>& lookup = nullptr);

// A single setting given as raw text, as from the environment or a flag.
void ApplySetting(GatewayConfig& config, std::string_view key, std::string_view raw_value);

std::vector<std::string_view> ConfigKeys();

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_CONFIG_H_
