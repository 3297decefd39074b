#include "cahicha/gateway/gateway.h"

#include <algorithm>
#include <cctype>
#include <vector>

#include <nlohmann/json.hpp>

#include "cahicha/codec/base64.h"
#include "cahicha/codec/errors.h"
#include "cahicha/crypto/errors.h"
#include "cahicha/gateway/assets.h"

namespace cahicha::gateway {
namespace {

using SteadyClock = std::chrono::steady_clock;
using nlohmann::json;

constexpr char kVerdictForwarded[] = "forwarded";
constexpr char kVerdictChallenged[] = "challenged";
constexpr char kVerdictVerified[] = "verified";
constexpr char kVerdictNotFound[] = "not_found";
constexpr char kVerdictUpstreamError[] = "upstream_error";
constexpr char kVerdictInternal[] = "internal";

// Request headers never relayed: RFC 9110 hop-by-hop fields, lengths the
// client library recomputes, and httplib's connection pseudo-headers.
constexpr std::string_view kDroppedRequestHeaders[] = {
    "connection",  "keep-alive",     "proxy-authenticate", "proxy-authorization",
    "proxy-connection", "te",        "trailer",            "transfer-encoding",
    "upgrade",     "content-length", "remote_addr",        "remote_port",
    "local_addr",  "local_port",
};

constexpr std::string_view kDroppedResponseHeaders[] = {
    "connection", "keep-alive", "proxy-authenticate", "proxy-connection", "te",
    "trailer",    "transfer-encoding", "upgrade",     "content-length",
};

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <size_t N>
bool InList(std::string_view name, const std::string_view (&list)[N]) {
  for (std::string_view d : list)
    if (EqualsIgnoreCase(name, d)) return true;
  return false;
}

// Header names listed in Connection are hop-by-hop too.
std::vector<std::string> ConnectionTokens(const httplib::Headers& headers) {
  std::vector<std::string> out;
  auto [begin, end] = headers.equal_range("Connection");
  for (auto it = begin; it != end; ++it) {
    std::string_view v = it->second;
    while (!v.empty()) {
      const size_t comma = std::min(v.find(','), v.size());
      std::string_view token = v.substr(0, comma);
      while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
      while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
      if (!token.empty()) out.emplace_back(token);
      v.remove_prefix(std::min(comma + 1, v.size()));
    }
  }
  return out;
}

bool Dropped(std::string_view name, const std::vector<std::string>& connection_tokens,
             bool request) {
  if (request ? InList(name, kDroppedRequestHeaders) : InList(name, kDroppedResponseHeaders))
    return true;
  for (const std::string& t : connection_tokens)
    if (EqualsIgnoreCase(name, t)) return true;
  return false;
}

void SetJson(httplib::Response& response, int status, const json& body) {
  response.status = status;
  response.set_header("Cache-Control", "no-store");
  response.set_content(body.dump(), "application/json");
}

bool AcceptsHtml(const httplib::Request& request) {
  return request.get_header_value("Accept").find("text/html") != std::string::npos;
}

double Millis(SteadyClock::duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

}  // namespace

std::string SafeRedirectTarget(std::string_view target) {
  if (target.empty() || target.front() != '/') return "/";
  if (target.size() > 1 && (target[1] == '/' || target[1] == '\\')) return "/";
  for (char c : target) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f || c == '\\') return "/";
  }
  return std::string(target);
}

std::string NormalizePath(std::string_view path) {
  std::vector<std::string_view> segments;
  size_t pos = 0;
  while (pos <= path.size()) {
    const size_t slash = std::min(path.find('/', pos), path.size());
    const std::string_view seg = path.substr(pos, slash - pos);
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
    } else if (!seg.empty() && seg != ".") {
      segments.push_back(seg);
    }
    pos = slash + 1;
  }
  std::string out;
  for (std::string_view s : segments) {
    out.push_back('/');
    out.append(s);
  }
  const bool trailing = !path.empty() && path.back() == '/';
  if (out.empty() || trailing) out.push_back('/');
  return out;
}

bool IsReservedPath(std::string_view path) {
  const std::string normal = NormalizePath(path);
  const std::string_view bare = kReservedPrefix.substr(0, kReservedPrefix.size() - 1);
  return normal == bare || normal.rfind(kReservedPrefix, 0) == 0;
}

Gateway::Gateway(const GatewayConfig& config, GatewayParts parts)
    : tls_(!config.unsafe_no_tls),
      cookie_name_(config.cookie_name),
      token_max_age_(std::chrono::hours(config.token_max_age_hours)),
      parts_(std::move(parts)) {
  if (!parts_.engine || !parts_.token_key || !parts_.upstream)
    throw std::invalid_argument("gateway needs an engine, a token key and an upstream");
  if (!parts_.access_log) parts_.access_log = std::make_shared<NullAccessLog>();
  if (!parts_.clock) parts_.clock = [] { return engine::Clock::now(); };
  if (parts_.challenge_script.empty()) parts_.challenge_script = BuiltinChallengeScript();
}

void Gateway::Handle(const httplib::Request& request, httplib::Response& response) {
  const auto entered = SteadyClock::now();
  Outcome outcome;
  try {
    if (IsReservedPath(request.path)) {
      outcome = HandleReserved(request, NormalizePath(request.path), response);
    } else if (HasValidToken(request)) {
      outcome = Forward(request, response);
    } else {
      outcome = Challenge(request, response);
    }
  } catch (const std::exception&) {
    response = httplib::Response();
    SetJson(response, 500, {{"error", "internal"}});
    outcome = {kVerdictInternal, {}};
  }
  if (outcome.verdict != kVerdictForwarded) response.set_header(kMarkerHeader, outcome.verdict);
  const auto finished = SteadyClock::now();

  AccessRecord record;
  record.timestamp = parts_.clock();
  record.method = request.method;
  record.path = request.path;
  record.status = response.status;
  record.verdict = outcome.verdict;
  record.latency_ms = Millis(
      (outcome.dispatched != SteadyClock::time_point{} ? outcome.dispatched : finished) - entered);
  record.total_ms = Millis(finished - entered);
  parts_.access_log->Write(record);
}

bool Gateway::HasValidToken(const httplib::Request& request) const {
  auto [begin, end] = request.headers.equal_range("Cookie");
  for (auto it = begin; it != end; ++it) {
    const std::optional<std::string> value = token::FindCookie(it->second, cookie_name_);
    if (value && token::ValidateToken(*parts_.token_key, *value, parts_.clock(), token_max_age_))
      return true;
  }
  return false;
}

Gateway::Outcome Gateway::HandleReserved(const httplib::Request& request, std::string_view path,
                                         httplib::Response& response) {
  const bool get = request.method == "GET" || request.method == "HEAD";
  if (path == "/__cahicha/challenge") {
    if (!get) {
      SetJson(response, 405, {{"error", "method_not_allowed"}});
      response.set_header("Allow", "GET");
      return {kVerdictNotFound, {}};
    }
    return IssueChallenge(response);
  }
  if (path == "/__cahicha/verify") {
    if (request.method != "POST") {
      SetJson(response, 405, {{"error", "method_not_allowed"}});
      response.set_header("Allow", "POST");
      return {kVerdictNotFound, {}};
    }
    return VerifySubmission(request, response);
  }
  if (get && path == kScriptPath) {
    response.status = 200;
    response.set_header("Cache-Control", "no-cache");
    response.set_content(parts_.challenge_script, "text/javascript; charset=utf-8");
    return {kVerdictChallenged, {}};
  }
  if (get && (path == "/__cahicha/" || path == "/__cahicha")) {
    const std::string redirect =
        SafeRedirectTarget(request.has_param("redirect_to") ? request.get_param_value("redirect_to") : "/");
    response.status = 200;
    response.set_header("Cache-Control", "no-store");
    response.set_content(RenderChallengePage(redirect), "text/html; charset=utf-8");
    return {kVerdictChallenged, {}};
  }
  SetJson(response, 404, {{"error", "not_found"}});
  return {kVerdictNotFound, {}};
}

Gateway::Outcome Gateway::IssueChallenge(httplib::Response& response) {
  engine::IssuedChallenge issued;
  try {
    issued = parts_.engine->IssueChallenge(parts_.clock());
  } catch (const crypto::EntropyUnavailable&) {
    SetJson(response, 503, {{"error", "entropy_unavailable"}});
    return {kVerdictInternal, {}};
  } catch (const engine::ChallengeStoreFull&) {
    SetJson(response, 503, {{"error", "challenge_store_full"}});
    response.set_header("Retry-After", "5");
    return {kVerdictInternal, {}};
  }
  json body = issued.options.ToJson();
  body["record_id"] = issued.record.record_id;
  SetJson(response, 200, body);
  return {kVerdictChallenged, {}};
}

Gateway::Outcome Gateway::VerifySubmission(const httplib::Request& request,
                                           httplib::Response& response) {
  engine::AttestationResponse submission;
  std::string redirect_to = "/";
  try {
    const json body = json::parse(request.body);
    submission.record_id = body.at("record_id").get<std::string>();
    submission.attestation_object =
        codec::DecodeBase64Url(body.at("attestation_object_b64").get<std::string>());
    submission.client_data_json = codec::DecodeBase64Url(body.at("client_data_b64").get<std::string>());
    if (body.contains("redirect_to") && !body["redirect_to"].is_null())
      redirect_to = body["redirect_to"].get<std::string>();
  } catch (const json::exception&) {
    SetJson(response, 400, {{"error", "MalformedBody"}});
    return {"rejected_MalformedBody", {}};
  } catch (const codec::CodecError&) {
    SetJson(response, 400, {{"error", "MalformedBody"}});
    return {"rejected_MalformedBody", {}};
  }

  const engine::Timestamp now = parts_.clock();
  const engine::VerificationOutcome outcome = parts_.engine->Verify(submission, now);
  if (!outcome.human()) {
    const std::string reason(engine::ReasonName(*outcome.reason));
    SetJson(response, 403, {{"error", reason}});
    return {"rejected_" + reason, {}};
  }

  std::string token_text;
  try {
    token_text = token::MintToken(*parts_.token_key, now);
  } catch (const crypto::EntropyUnavailable&) {
    SetJson(response, 503, {{"error", "entropy_unavailable"}});
    return {kVerdictInternal, {}};
  }
  token::CookieSettings cookie;
  cookie.name = cookie_name_;
  cookie.max_age = std::chrono::duration_cast<std::chrono::seconds>(token_max_age_);
  const std::string location = SafeRedirectTarget(redirect_to);
  response.status = 303;
  response.set_header("Set-Cookie", token::BuildCookie(token_text, cookie));
  response.set_header("Location", location);
  response.set_header("Cache-Control", "no-store");
  response.set_content(json{{"verdict", "Human"}, {"redirect_to", location}}.dump(), "application/json");
  return {kVerdictVerified, {}};
}

Gateway::Outcome Gateway::Challenge(const httplib::Request& request, httplib::Response& response) {
  if (AcceptsHtml(request)) {
    response.status = 200;
    response.set_header("Cache-Control", "no-store");
    response.set_content(RenderChallengePage(SafeRedirectTarget(request.target)),
                         "text/html; charset=utf-8");
  } else {
    SetJson(response, 401, {{"error", "verification_required"}});
  }
  return {kVerdictChallenged, {}};
}

Gateway::Outcome Gateway::Forward(const httplib::Request& request, httplib::Response& response) {
  ForwardRequest out;
  out.method = request.method;
  out.target = request.target.empty() ? request.path : request.target;
  out.body = request.body;

  const std::vector<std::string> tokens = ConnectionTokens(request.headers);
  std::string forwarded_for;
  for (const auto& [name, value] : request.headers) {
    if (Dropped(name, tokens, true)) continue;
    if (EqualsIgnoreCase(name, "X-Forwarded-For")) {
      forwarded_for += forwarded_for.empty() ? value : ", " + value;
      continue;
    }
    if (EqualsIgnoreCase(name, "X-Forwarded-Proto")) continue;
    if (EqualsIgnoreCase(name, "Cookie")) {
      std::string rest = token::RemoveCookie(value, cookie_name_);
      if (!rest.empty()) out.headers.emplace(name, std::move(rest));
      continue;
    }
    out.headers.emplace(name, value);
  }
  if (!request.remote_addr.empty())
    forwarded_for += forwarded_for.empty() ? request.remote_addr : ", " + request.remote_addr;
  if (!forwarded_for.empty()) out.headers.emplace("X-Forwarded-For", forwarded_for);
  out.headers.emplace("X-Forwarded-Proto", tls_ ? "https" : "http");

  // httplib parsed any Range header already and would slice the relayed
  // body a second time; the origin is the one to honour it.
  const_cast<httplib::Request&>(request).ranges.clear();

  const auto dispatched = SteadyClock::now();
  ForwardResult result = parts_.upstream->Forward(out);
  if (result.status != ForwardStatus::kOk) {
    const bool timeout = result.status == ForwardStatus::kTimeout;
    SetJson(response, timeout ? 504 : 502,
            {{"error", timeout ? "upstream_timeout" : "upstream_unreachable"}});
    return {kVerdictUpstreamError, dispatched};
  }

  response.status = result.http_status;
  const std::vector<std::string> response_tokens = ConnectionTokens(result.headers);
  const bool head = request.method == "HEAD";
  for (auto& [name, value] : result.headers) {
    // A HEAD response has no body to recompute the length from.
    const bool keep = head && EqualsIgnoreCase(name, "Content-Length");
    if (keep || !Dropped(name, response_tokens, false)) response.headers.emplace(name, std::move(value));
  }
  response.body = std::move(result.body);
  return {kVerdictForwarded, dispatched};
}

}  // namespace cahicha::gateway
