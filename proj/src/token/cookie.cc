#include "cahicha/token/cookie.h"

namespace cahicha::token {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void ForEachCookie(std::string_view header, Fn&& fn) {
  while (!header.empty()) {
    const size_t semi = header.find(';');
    const std::string_view pair = Trim(header.substr(0, semi));
    if (!pair.empty()) {
      const size_t eq = pair.find('=');
      const std::string_view name = Trim(pair.substr(0, eq));
      const std::string_view value =
          eq == std::string_view::npos ? std::string_view() : Trim(pair.substr(eq + 1));
      fn(pair, name, value);
    }
    if (semi == std::string_view::npos) break;
    header.remove_prefix(semi + 1);
  }
}

}  // namespace

std::string BuildCookie(std::string_view token, const CookieSettings& settings) {
  std::string out = settings.name;
  out += '=';
  out += token;
  out += "; Path=/; Max-Age=";
  out += std::to_string(settings.max_age.count());
  out += "; HttpOnly; Secure; SameSite=Lax";
  return out;
}

std::optional<std::string> FindCookie(std::string_view cookie_header, std::string_view name) {
  std::optional<std::string> found;
  ForEachCookie(cookie_header, [&](std::string_view, std::string_view n, std::string_view value) {
    if (!found && n == name) {
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
      found = std::string(value);
    }
  });
  return found;
}

std::string RemoveCookie(std::string_view cookie_header, std::string_view name) {
  std::string out;
  ForEachCookie(cookie_header, [&](std::string_view pair, std::string_view n, std::string_view) {
    if (n == name) return;
    if (!out.empty()) out += "; ";
    out += pair;
  });
  return out;
}

}  // namespace cahicha::token
