#include "cahicha/gateway/config.h"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

namespace cahicha::gateway {
namespace {

using Value = std::variant<std::string, int64_t, bool, std::vector<std::string>>;

enum class Kind { kString, kInt, kBool, kList };

struct Setting {
  std::string_view key;
  Kind kind;
  void (*apply)(GatewayConfig&, const Value&);
};

const std::string& S(const Value& v) { return std::get<std::string>(v); }
int64_t I(const Value& v) { return std::get<int64_t>(v); }
bool B(const Value& v) { return std::get<bool>(v); }

const Setting kSettings[] = {
    {"listen_address", Kind::kString, [](GatewayConfig& c, const Value& v) { c.listen_address = S(v); }},
    {"upstream_origin", Kind::kString, [](GatewayConfig& c, const Value& v) { c.upstream_origin = S(v); }},
    {"tls_cert_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.tls_cert_path = S(v); }},
    {"tls_key_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.tls_key_path = S(v); }},
    {"unsafe_no_tls", Kind::kBool, [](GatewayConfig& c, const Value& v) { c.unsafe_no_tls = B(v); }},
    {"mode", Kind::kString,
     [](GatewayConfig& c, const Value& v) {
       const std::optional<engine::Mode> mode = engine::ParseMode(S(v));
       if (!mode) throw ConfigError("mode must be strict or general, got '" + S(v) + "'");
       c.mode = *mode;
     }},
    {"rp_id", Kind::kString, [](GatewayConfig& c, const Value& v) { c.rp_id = S(v); }},
    {"rp_name", Kind::kString, [](GatewayConfig& c, const Value& v) { c.rp_name = S(v); }},
    {"expected_origins", Kind::kList,
     [](GatewayConfig& c, const Value& v) { c.expected_origins = std::get<std::vector<std::string>>(v); }},
    {"require_uv", Kind::kBool, [](GatewayConfig& c, const Value& v) { c.require_uv = B(v); }},
    {"challenge_ttl_seconds", Kind::kInt,
     [](GatewayConfig& c, const Value& v) { c.challenge_ttl_seconds = I(v); }},
    {"cookie_name", Kind::kString, [](GatewayConfig& c, const Value& v) { c.cookie_name = S(v); }},
    {"token_key_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.token_key_path = S(v); }},
    {"token_max_age_hours", Kind::kInt,
     [](GatewayConfig& c, const Value& v) { c.token_max_age_hours = I(v); }},
    {"mds_blob_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.mds_blob_path = S(v); }},
    {"mds_root_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.mds_root_path = S(v); }},
    {"mds_reject_expired", Kind::kBool,
     [](GatewayConfig& c, const Value& v) { c.mds_reject_expired = B(v); }},
    {"upstream_timeout_seconds", Kind::kInt,
     [](GatewayConfig& c, const Value& v) { c.upstream_timeout_seconds = I(v); }},
    {"worker_threads", Kind::kInt, [](GatewayConfig& c, const Value& v) { c.worker_threads = I(v); }},
    {"access_log_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.access_log_path = S(v); }},
    {"ui_bundle_path", Kind::kString, [](GatewayConfig& c, const Value& v) { c.ui_bundle_path = S(v); }},
};

const Setting& FindSetting(std::string_view key) {
  for (const Setting& s : kSettings)
    if (s.key == key) return s;
  throw ConfigError("unknown setting '" + std::string(key) + "'");
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// A quoted string starting at s[pos]; advances pos past the closing quote.
std::string ParseQuoted(std::string_view s, size_t& pos) {
  const char quote = s[pos++];
  std::string out;
  while (pos < s.size() && s[pos] != quote) {
    char c = s[pos++];
    if (c == '\\' && quote == '"') {
      if (pos >= s.size()) break;
      c = s[pos++];
      switch (c) {
        case 'n': c = '\n'; break;
        case 't': c = '\t'; break;
        case '"':
        case '\\': break;
        default: throw ConfigError(std::string("unsupported escape \\") + c);
      }
    }
    out.push_back(c);
  }
  if (pos >= s.size()) throw ConfigError("unterminated string");
  ++pos;
  return out;
}

int64_t ParseInt(std::string_view text) {
  text = Trim(text);
  int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("not an integer: '" + std::string(text) + "'");
  return v;
}

bool ParseBool(std::string_view text) {
  const std::string v = Lower(Trim(text));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

// A TOML value with nothing but an optional comment after it.
Value ParseTomlValue(std::string_view text) {
  text = Trim(text);
  if (text.empty()) throw ConfigError("missing value");
  size_t pos = 0;
  Value out;
  if (text[0] == '"' || text[0] == '\'') {
    out = ParseQuoted(text, pos);
  } else if (text[0] == '[') {
    std::vector<std::string> items;
    ++pos;
    for (;;) {
      while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ','))
        ++pos;
      if (pos >= text.size()) throw ConfigError("unterminated array");
      if (text[pos] == ']') {
        ++pos;
        break;
      }
      if (text[pos] != '"' && text[pos] != '\'') throw ConfigError("arrays hold strings only");
      items.push_back(ParseQuoted(text, pos));
    }
    out = std::move(items);
  } else {
    const size_t end = std::min(text.find('#'), text.size());
    const std::string_view bare = Trim(text.substr(0, end));
    pos = text.size();
    if (bare == "true" || bare == "false") {
      out = bare == "true";
    } else {
      out = ParseInt(bare);
    }
    return out;
  }
  const std::string_view rest = Trim(text.substr(pos));
  if (!rest.empty() && rest[0] != '#') throw ConfigError("unexpected text after value");
  return out;
}

void Apply(GatewayConfig& config, const Setting& setting, Value value) {
  const bool ok = (setting.kind == Kind::kString && std::holds_alternative<std::string>(value)) ||
                  (setting.kind == Kind::kInt && std::holds_alternative<int64_t>(value)) ||
                  (setting.kind == Kind::kBool && std::holds_alternative<bool>(value)) ||
                  (setting.kind == Kind::kList && std::holds_alternative<std::vector<std::string>>(value));
  if (!ok) throw ConfigError("wrong type for '" + std::string(setting.key) + "'");
  setting.apply(config, value);
}

bool IsLoopback(const std::string& host) {
  return host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

std::string NormalizeHost(const std::string& host) {
  if (IsLoopback(host) || host == "0.0.0.0" || host == "::") return "loopback";
  return Lower(host);
}

}  // namespace

HostPort ParseHostPort(std::string_view text, int default_port) {
  std::string_view rest = Trim(text);
  const size_t scheme = rest.find("://");
  if (scheme != std::string_view::npos) {
    const std::string s = Lower(rest.substr(0, scheme));
    if (s == "https") default_port = 443;
    else if (s == "http") default_port = 80;
    else throw ConfigError("unsupported scheme in '" + std::string(text) + "'");
    rest = rest.substr(scheme + 3);
    rest = rest.substr(0, std::min(rest.find('/'), rest.size()));
  }
  HostPort out;
  std::string_view port_text;
  if (!rest.empty() && rest.front() == '[') {
    const size_t close = rest.find(']');
    if (close == std::string_view::npos) throw ConfigError("bad address '" + std::string(text) + "'");
    out.host = std::string(rest.substr(1, close - 1));
    rest = rest.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') throw ConfigError("bad address '" + std::string(text) + "'");
      port_text = rest.substr(1);
    }
  } else {
    const size_t colon = rest.rfind(':');
    out.host = std::string(rest.substr(0, colon));
    if (colon != std::string_view::npos) port_text = rest.substr(colon + 1);
  }
  if (out.host.empty()) throw ConfigError("missing host in '" + std::string(text) + "'");
  out.port = port_text.empty() ? default_port : static_cast<int>(ParseInt(port_text));
  if (out.port < 0 || out.port > 65535) throw ConfigError("port out of range in '" + std::string(text) + "'");
  return out;
}

std::vector<std::string> GatewayConfig::EffectiveOrigins() const {
  if (!expected_origins.empty()) return expected_origins;
  const HostPort listen = ParseHostPort(listen_address, 443);
  const std::string scheme = unsafe_no_tls ? "http" : "https";
  const int default_port = unsafe_no_tls ? 80 : 443;
  std::string origin = scheme + "://" + rp_id;
  if (listen.port != default_port) origin += ":" + std::to_string(listen.port);
  return {origin};
}

std::string GatewayConfig::UpstreamUrl() const {
  if (upstream_origin.find("://") != std::string::npos) return upstream_origin;
  return "http://" + upstream_origin;
}

engine::VerificationPolicy GatewayConfig::Policy() const {
  engine::VerificationPolicy p = engine::VerificationPolicy::ForMode(mode);
  p.rp_id = rp_id;
  p.rp_name = rp_name;
  p.expected_origins = EffectiveOrigins();
  if (require_uv) p.require_uv = *require_uv;
  p.challenge_ttl = std::chrono::seconds(challenge_ttl_seconds);
  return p;
}

void GatewayConfig::Validate() const {
  if (mode == engine::Mode::kStrict && (mds_blob_path.empty() || mds_root_path.empty()))
    throw ConfigError("strict mode needs mds_blob_path and mds_root_path");
  const HostPort listen = ParseHostPort(listen_address, 443);
  const HostPort upstream = ParseHostPort(UpstreamUrl(), 80);
  if (listen.port != 0 && listen.port == upstream.port &&
      NormalizeHost(listen.host) == NormalizeHost(upstream.host))
    throw ConfigError("upstream_origin must differ from listen_address");
  if (unsafe_no_tls && !IsLoopback(listen.host))
    throw ConfigError("unsafe_no_tls is only allowed on a loopback listen address");
  if (!unsafe_no_tls && (tls_cert_path.empty() || tls_key_path.empty()))
    throw ConfigError("tls_cert_path and tls_key_path are required (or unsafe_no_tls on loopback)");
  if (rp_id.empty()) throw ConfigError("rp_id is empty");
  if (challenge_ttl_seconds <= 0) throw ConfigError("challenge_ttl_seconds must be positive");
  if (token_max_age_hours <= 0) throw ConfigError("token_max_age_hours must be positive");
  if (upstream_timeout_seconds <= 0) throw ConfigError("upstream_timeout_seconds must be positive");
  if (worker_threads < 4) throw ConfigError("worker_threads must be at least 4");
  if (cookie_name.empty() ||
      cookie_name.find_first_of(" \t;,=\"()<>@:\\/[]?{}") != std::string::npos)
    throw ConfigError("cookie_name is not a valid cookie token");
  if (token_key_path.empty()) throw ConfigError("token_key_path is empty");
}

void ApplyConfigText(GatewayConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == '[') continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    try {
      const Setting& setting = FindSetting(Trim(trimmed.substr(0, eq)));
      Apply(config, setting, ParseTomlValue(trimmed.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void ApplyConfigFile(GatewayConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ApplyConfigText(config, buffer.str());
}

void ApplySetting(GatewayConfig& config, std::string_view key, std::string_view raw_value) {
  const Setting& setting = FindSetting(key);
  const std::string_view raw = Trim(raw_value);
  Value value;
  switch (setting.kind) {
    case Kind::kString:
      if (!raw.empty() && (raw[0] == '"' || raw[0] == '\'')) {
        value = ParseTomlValue(raw);
      } else {
        value = std::string(raw);
      }
      break;
    case Kind::kInt:
      value = ParseInt(raw);
      break;
    case Kind::kBool:
      value = ParseBool(raw);
      break;
    case Kind::kList:
      if (!raw.empty() && raw[0] == '[') {
        value = ParseTomlValue(raw);
      } else {
        std::vector<std::string> items;
        size_t start = 0;
        while (start <= raw.size() && !raw.empty()) {
          const size_t comma = std::min(raw.find(',', start), raw.size());
          const std::string_view item = Trim(raw.substr(start, comma - start));
          if (!item.empty()) items.emplace_back(item);
          start = comma + 1;
        }
        value = std::move(items);
      }
      break;
  }
  Apply(config, setting, std::move(value));
}

void ApplyEnvironment(GatewayConfig& config,
                      const std::function<const char*(const char*)>& lookup) {
  for (const Setting& s : kSettings) {
    std::string name = "CAHICHA_";
    for (char c : s.key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    const char* value = lookup ? lookup(name.c_str()) : std::getenv(name.c_str());
    if (!value) continue;
    try {
      ApplySetting(config, s.key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }
}

std::vector<std::string_view> ConfigKeys() {
  std::vector<std::string_view> out;
  for (const Setting& s : kSettings) out.push_back(s.key);
  return out;
}

}  // namespace cahicha::gateway
