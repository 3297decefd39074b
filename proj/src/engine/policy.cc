#include "cahicha/engine/policy.h"

namespace cahicha::engine {

std::string_view ModeName(Mode mode) { return mode == Mode::kStrict ? "strict" : "general"; }

std::optional<Mode> ParseMode(std::string_view name) {
  if (name == "strict" || name == "Strict") return Mode::kStrict;
  if (name == "general" || name == "General") return Mode::kGeneral;
  return std::nullopt;
}

VerificationPolicy VerificationPolicy::ForMode(Mode mode) {
  VerificationPolicy p;
  p.mode = mode;
  p.require_uv = mode == Mode::kStrict;
  return p;
}

}  // namespace cahicha::engine
