#ifndef CAHICHA_TOKEN_COOKIE_H_
#define CAHICHA_TOKEN_COOKIE_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace cahicha::token {

inline constexpr char kDefaultCookieName[] = "cahicha_token";

struct CookieSettings {
  std::string name = kDefaultCookieName;
  std::chrono::seconds max_age = std::chrono::hours(24);
};

// Set-Cookie value: "<name>=<token>; Path=/; Max-Age=<s>; HttpOnly; Secure;
// SameSite=Lax". Tokens are base64url so no escaping is needed.
std::string BuildCookie(std::string_view token, const CookieSettings& settings);

// First value of cookie |name| in a Cookie request header.
std::optional<std::string> FindCookie(std::string_view cookie_header, std::string_view name);

// The header with every |name| cookie removed; empty when nothing remains.
std::string RemoveCookie(std::string_view cookie_header, std::string_view name);

}  // namespace cahicha::token

#endif  // CAHICHA_TOKEN_COOKIE_H_
