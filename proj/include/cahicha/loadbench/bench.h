#ifndef CAHICHA_LOADBENCH_BENCH_H_
#define CAHICHA_LOADBENCH_BENCH_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cahicha/loadbench/origin_stub.h"
#include "cahicha/softauth/soft_authenticator.h"

namespace cahicha::loadbench {

enum class ScenarioKind { kVerifiedLoad, kBotFlood, kMixed };

std::string_view ScenarioName(ScenarioKind kind);

class TargetUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AccountingViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchScenario {
  ScenarioKind kind = ScenarioKind::kVerifiedLoad;
  // Verified clients. For a flood these run alongside it for the whole
  // duration; zero disables them.
  int users = 6;
  double spawn_rate = 1.0;
  // Hold time at full strength, excluding ramp-up and ramp-down.
  int duration_seconds = 60;
  std::string target_url;
  int flood_threads = 64;

  // Requested by verified clients after their ceremony.
  std::string path = "/";
  std::chrono::milliseconds think_min{500};
  std::chrono::milliseconds think_max{1500};
  std::chrono::seconds request_timeout{30};

  // Origin claimed in client data. Empty: https://<rp.id>[:port of target].
  std::string origin;
  softauth::AttestationMode attestation = softauth::AttestationMode::kPackedSelf;
  codec::Aaguid aaguid{};
  std::shared_ptr<const softauth::AttestationIdentity> identity;

  std::string ca_cert_path;
  bool insecure = false;

  // Throws std::invalid_argument: users >= 1 (flood: >= 0), duration >= 1.
  void Validate() const;
};

struct SecondSample {
  int second = 0;
  uint64_t requests = 0;
  uint64_t failures = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  int active_users = 0;
};

struct BenchReport {
  std::string workload;  // "verified" or "flood"
  uint64_t requests_total = 0;
  uint64_t failures_total = 0;
  // From the origin stub's own counter when one is attached, else inferred
  // from responses lacking the gateway marker.
  uint64_t forwarded_to_origin = 0;
  std::string forwarded_source;
  // Answered by the gateway itself: challenges, 401s and the ceremony
  // endpoints.
  uint64_t blocked_at_gateway = 0;
  uint64_t server_errors = 0;
  // Responses without the gateway marker, as seen by the client.
  uint64_t client_observed_forwarded = 0;
  uint64_t ceremonies = 0;
  double latency_p50_ms = 0;
  double latency_p95_ms = 0;
  double latency_p99_ms = 0;
  // Hold window only.
  int steady_seconds = 0;
  double steady_rps = 0;
  double steady_p50_ms = 0;
  double wall_seconds = 0;
  std::vector<SecondSample> series;
  std::map<std::string, uint64_t> failure_reasons;
  std::vector<BenchReport> concurrent;

  bool AccountingHolds() const {
    return requests_total == forwarded_to_origin + blocked_at_gateway + failures_total;
  }
  // This report and every concurrent one.
  bool AccountingHoldsEverywhere() const;
};

// |stub| may be null when the origin is not in this process.
BenchReport RunVerifiedLoad(const BenchScenario& scenario, const OriginStub* stub);
// Flood plus scenario.users verified clients; their report is concurrent[0].
BenchReport RunBotFlood(const BenchScenario& scenario, const OriginStub* stub);
// Verified load with a flood alongside, reported as concurrent[0].
BenchReport RunMixed(const BenchScenario& scenario, const OriginStub* stub);
BenchReport RunScenario(const BenchScenario& scenario, const OriginStub* stub);

nlohmann::ordered_json ReportToJson(const BenchReport& report);
// Header "second,requests,failures,p50_ms,p95_ms", one row per second.
std::string ReportToCsv(const BenchReport& report);

// Format from the extension (.csv, otherwise JSON). Throws
// AccountingViolation without writing, or std::runtime_error on I/O
// failure.
void EmitReport(const BenchReport& report, const std::filesystem::path& path);

}  // namespace cahicha::loadbench

#endif  // CAHICHA_LOADBENCH_BENCH_H_
