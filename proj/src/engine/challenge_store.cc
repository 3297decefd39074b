#include "cahicha/engine/challenge_store.h"

#include <algorithm>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/digest.h"

namespace cahicha::engine {
namespace {

constexpr auto kSweepInterval = std::chrono::seconds(30);

bool Expired(const ChallengeRecord& r, Timestamp now, std::chrono::seconds ttl) {
  return now - r.issued_at > ttl;
}

}  // namespace

ChallengeStore::ChallengeStore(crypto::RandomSource& rng, size_t capacity)
    : rng_(rng), capacity_(capacity) {}

ChallengeRecord ChallengeStore::Issue(std::string_view rp_id, Timestamp now,
                                      std::chrono::seconds ttl) {
  ChallengeRecord record;
  rng_.Fill(record.challenge);
  record.record_id = codec::EncodeBase64Url(rng_.Generate(16));
  record.issued_at = now;
  record.issued_monotonic = std::chrono::steady_clock::now();
  record.rp_id = std::string(rp_id);

  std::lock_guard lock(mutex_);
  if (now - last_sweep_ > kSweepInterval || records_.size() >= capacity_) {
    SweepLocked(now, ttl);
    last_sweep_ = now;
  }
  if (records_.size() >= capacity_) throw ChallengeStoreFull();
  records_.emplace(record.record_id, record);
  return record;
}

ConsumeResult ChallengeStore::Consume(std::string_view record_id,
                                      std::span<const uint8_t> presented, Timestamp now,
                                      std::chrono::seconds ttl) {
  std::lock_guard lock(mutex_);
  auto it = records_.find(std::string(record_id));
  if (it == records_.end()) return ConsumeResult::kUnknownRecord;
  ChallengeRecord& record = it->second;
  if (!crypto::ConstantTimeEquals(record.challenge, presented)) return ConsumeResult::kMismatch;
  if (record.consumed) return ConsumeResult::kReplayed;
  if (Expired(record, now, ttl)) return ConsumeResult::kExpired;
  record.consumed = true;
  return ConsumeResult::kConsumed;
}

size_t ChallengeStore::Sweep(Timestamp now, std::chrono::seconds ttl) {
  std::lock_guard lock(mutex_);
  return SweepLocked(now, ttl);
}

size_t ChallengeStore::SweepLocked(Timestamp now, std::chrono::seconds ttl) {
  // Keep expired records for one more TTL so late answers still get
  // ChallengeExpired instead of an unknown-record mismatch.
  return std::erase_if(records_, [&](const auto& kv) { return now - kv.second.issued_at > 2 * ttl; });
}

std::optional<ChallengeRecord> ChallengeStore::Lookup(std::string_view record_id) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(std::string(record_id));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

size_t ChallengeStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

}  // namespace cahicha::engine
