#include "cahicha/gateway/assets.h"

namespace cahicha::gateway {
namespace {

constexpr std::string_view kPageHead = R"(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>Verifying you are human</title>
<style>
body{font-family:system-ui,sans-serif;max-width:32rem;margin:4rem auto;padding:0 1rem;color:#1b1b1b}
button{font-size:1rem;padding:.6rem 1.2rem}
#status{min-height:3rem}
</style>
</head>
<body>
<main id="cahicha" data-redirect=")";

constexpr std::string_view kPageTail = R"(">
<h1>One quick check</h1>
<p>Touch your security key or confirm with your device's fingerprint, face or PIN prompt to continue.</p>
<p id="status" role="status" aria-live="polite">Loading&hellip;</p>
<button id="retry" type="button" hidden>Try again</button>
<noscript><p>This check needs JavaScript.</p></noscript>
</main>
<script src="/__cahicha/app.js"></script>
</body>
</html>
)";

constexpr std::string_view kScript = R"JS((function () {
  "use strict";
  var root = document.getElementById("cahicha");
  var statusEl = document.getElementById("status");
  var retryEl = document.getElementById("retry");
  var redirectTo = root.getAttribute("data-redirect") || "/";
  var busy = false;
  var staleRetried = false;

  function say(text) { statusEl.textContent = text; }

  function fromB64url(s) {
    s = s.replace(/-/g, "+").replace(/_/g, "/");
    while (s.length % 4) s += "=";
    var bin = atob(s), out = new Uint8Array(bin.length);
    for (var i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }

  function toB64url(buf) {
    var bytes = new Uint8Array(buf), bin = "";
    for (var i = 0; i < bytes.length; i++) bin += String.fromCharCode(bytes[i]);
    return btoa(bin).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
  }

  function fail(text) {
    busy = false;
    say(text);
    retryEl.hidden = false;
    retryEl.focus();
  }

  function run() {
    if (busy) return;
    busy = true;
    retryEl.hidden = true;
    if (!window.PublicKeyCredential || !navigator.credentials) {
      fail("This browser cannot create security-key credentials. Try a current version of Chrome, Edge, Firefox or Safari.");
      return;
    }
    say("Loading…");
    fetch("/__cahicha/challenge", { headers: { Accept: "application/json" }, cache: "no-store" })
      .then(function (r) {
        if (!r.ok) throw new Error("challenge request failed (" + r.status + ")");
        return r.json();
      })
      .then(function (o) {
        say("Waiting for your authenticator…");
        var publicKey = {
          challenge: fromB64url(o.challenge),
          rp: o.rp,
          user: { id: fromB64url(o.user.id), name: o.user.name, displayName: o.user.displayName },
          pubKeyCredParams: o.pubKeyCredParams,
          authenticatorSelection: o.authenticatorSelection,
          attestation: o.attestation,
          timeout: o.timeout
        };
        return navigator.credentials.create({ publicKey: publicKey }).then(function (cred) {
          say("Checking…");
          return fetch("/__cahicha/verify", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({
              record_id: o.record_id,
              attestation_object_b64: toB64url(cred.response.attestationObject),
              client_data_b64: toB64url(cred.response.clientDataJSON),
              redirect_to: redirectTo
            })
          });
        });
      })
      .then(function (r) {
        if (r.ok || r.redirected) {
          say("Verified. Redirecting…");
          window.location.replace(r.redirected ? r.url : redirectTo);
          return;
        }
        return r.json().catch(function () { return {}; }).then(function (body) {
          var reason = body.error || ("HTTP " + r.status);
          if (reason === "ChallengeExpired" && !staleRetried) {
            staleRetried = true;
            busy = false;
            run();
            return;
          }
          fail("Verification failed: " + reason);
        });
      })
      .catch(function (e) {
        fail(e && e.name === "NotAllowedError" ? "The prompt was dismissed or timed out." : String(e && e.message || e));
      });
  }

  retryEl.addEventListener("click", run);
  run();
})();
)JS";

}  // namespace

std::string HtmlEscape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string RenderChallengePage(std::string_view redirect_to) {
  std::string page;
  page.reserve(kPageHead.size() + kPageTail.size() + redirect_to.size() + 16);
  page += kPageHead;
  page += HtmlEscape(redirect_to);
  page += kPageTail;
  return page;
}

std::string_view BuiltinChallengeScript() { return kScript; }

}  // namespace cahicha::gateway
