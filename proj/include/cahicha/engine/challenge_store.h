#ifndef CAHICHA_ENGINE_CHALLENGE_STORE_H_
#define CAHICHA_ENGINE_CHALLENGE_STORE_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "cahicha/crypto/bytes.h"
#include "cahicha/crypto/random.h"
#include "cahicha/engine/policy.h"

namespace cahicha::engine {

inline constexpr size_t kChallengeSize = 32;
using Challenge = std::array<uint8_t, kChallengeSize>;

struct ChallengeRecord {
  std::string record_id;
  Challenge challenge{};
  Timestamp issued_at;
  std::chrono::steady_clock::time_point issued_monotonic;
  std::string rp_id;
  bool consumed = false;
};

enum class ConsumeResult {
  kConsumed,
  kUnknownRecord,
  kMismatch,
  kReplayed,
  kExpired,
};

class ChallengeStoreFull : public std::runtime_error {
 public:
  ChallengeStoreFull() : std::runtime_error("challenge store at capacity") {}
};

// In-memory single-use challenge registry. Records expire after the TTL
// and are swept lazily; nothing survives a restart.
class ChallengeStore {
 public:
  static constexpr size_t kDefaultCapacity = 200000;

  explicit ChallengeStore(crypto::RandomSource& rng = crypto::DefaultRandom(),
                          size_t capacity = kDefaultCapacity);

  ChallengeStore(const ChallengeStore&) = delete;
  ChallengeStore& operator=(const ChallengeStore&) = delete;

  // Throws crypto::EntropyUnavailable or ChallengeStoreFull.
  ChallengeRecord Issue(std::string_view rp_id, Timestamp now, std::chrono::seconds ttl);

  // Atomic check-and-set: at most one call per record ever returns
  // kConsumed. A mismatching challenge leaves the record untouched.
  ConsumeResult Consume(std::string_view record_id, std::span<const uint8_t> presented,
                        Timestamp now, std::chrono::seconds ttl);

  // Drops records older than twice the TTL. Returns how many were removed.
  size_t Sweep(Timestamp now, std::chrono::seconds ttl);

  std::optional<ChallengeRecord> Lookup(std::string_view record_id) const;
  size_t size() const;

 private:
  size_t SweepLocked(Timestamp now, std::chrono::seconds ttl);

  crypto::RandomSource& rng_;
  const size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, ChallengeRecord> records_;
  Timestamp last_sweep_{};
};

}  // namespace cahicha::engine

#endif  // CAHICHA_ENGINE_CHALLENGE_STORE_H_
