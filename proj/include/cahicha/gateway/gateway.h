#ifndef CAHICHA_GATEWAY_GATEWAY_H_
#define CAHICHA_GATEWAY_GATEWAY_H_

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

#include "cahicha/engine/verification_engine.h"
#include "cahicha/gateway/access_log.h"
#include "cahicha/gateway/config.h"
#include "cahicha/gateway/upstream.h"
#include "cahicha/token/cookie.h"
#include "cahicha/token/session_token.h"

namespace cahicha::gateway {

// Present on every response the gateway produces itself; absent on relayed
// origin responses.
inline constexpr char kMarkerHeader[] = "X-Cahicha";

using WallClock = std::function<engine::Timestamp()>;

struct GatewayParts {
  std::shared_ptr<engine::VerificationEngine> engine;
  std::shared_ptr<const token::TokenKey> token_key;
  std::shared_ptr<Upstream> upstream;
  std::shared_ptr<AccessLog> access_log;
  // Defaults to the system clock.
  WallClock clock;
  // Defaults to the built-in script.
  std::string challenge_script;
};

// "/" unless |target| is a same-site relative path ("/x", not "//x").
std::string SafeRedirectTarget(std::string_view target);

// Collapses duplicate slashes and resolves dot segments.
std::string NormalizePath(std::string_view path);

bool IsReservedPath(std::string_view path);

// Per-request logic, independent of the listening socket.
class Gateway {
 public:
  Gateway(const GatewayConfig& config, GatewayParts parts);

  void Handle(const httplib::Request& request, httplib::Response& response);

  const engine::VerificationEngine& engine() const { return *parts_.engine; }

 private:
  struct Outcome {
    std::string verdict;
    std::chrono::steady_clock::time_point dispatched{};
  };

  Outcome HandleReserved(const httplib::Request& request, std::string_view path,
                         httplib::Response& response);
  Outcome IssueChallenge(httplib::Response& response);
  Outcome VerifySubmission(const httplib::Request& request, httplib::Response& response);
  Outcome Challenge(const httplib::Request& request, httplib::Response& response);
  Outcome Forward(const httplib::Request& request, httplib::Response& response);
  bool HasValidToken(const httplib::Request& request) const;

  const bool tls_;
  const std::string cookie_name_;
  const std::chrono::milliseconds token_max_age_;
  GatewayParts parts_;
};

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_GATEWAY_H_
