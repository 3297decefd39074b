#ifndef CAHICHA_GATEWAY_ASSETS_H_
#define CAHICHA_GATEWAY_ASSETS_H_

#include <string>
#include <string_view>

namespace cahicha::gateway {

inline constexpr std::string_view kReservedPrefix = "/__cahicha/";
inline constexpr std::string_view kScriptPath = "/__cahicha/app.js";

// The interstitial page. |redirect_to| is the path to return to after
// verification; it is escaped here.
std::string RenderChallengePage(std::string_view redirect_to);

// Built-in ceremony script, used when no UI bundle is configured.
std::string_view BuiltinChallengeScript();

std::string HtmlEscape(std::string_view text);

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_ASSETS_H_
