#include "cahicha/loadbench/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "cahicha/codec/base64.h"
#include "cahicha/crypto/random.h"
#include "cahicha/gateway/gateway.h"

namespace cahicha::loadbench {
namespace {

using Steady = std::chrono::steady_clock;
using nlohmann::json;

struct Target {
  std::string base;  // scheme://host:port
  std::string scheme;
  std::string host;
  int port = 0;
};

Target ParseTarget(const std::string& url) {
  Target t;
  const size_t sep = url.find("://");
  if (sep == std::string::npos) throw std::invalid_argument("target must be a URL: " + url);
  t.scheme = url.substr(0, sep);
  if (t.scheme != "http" && t.scheme != "https")
    throw std::invalid_argument("target scheme must be http or https: " + url);
  std::string rest = url.substr(sep + 3);
  rest = rest.substr(0, rest.find('/'));
  const size_t close = rest.find(']');
  const size_t colon = rest.rfind(':');
  if (colon != std::string::npos && (close == std::string::npos || colon > close)) {
    t.host = rest.substr(0, colon);
    t.port = std::stoi(rest.substr(colon + 1));
  } else {
    t.host = rest;
    t.port = t.scheme == "https" ? 443 : 80;
  }
  if (t.host.empty()) throw std::invalid_argument("target has no host: " + url);
  t.base = t.scheme + "://" + t.host + ":" + std::to_string(t.port);
  return t;
}

std::unique_ptr<httplib::Client> MakeClient(const BenchScenario& s, const Target& target) {
  auto client = std::make_unique<httplib::Client>(target.base);
  client->set_keep_alive(true);
  client->set_follow_location(false);
  client->set_connection_timeout(s.request_timeout);
  client->set_read_timeout(s.request_timeout);
  client->set_write_timeout(s.request_timeout);
  if (target.scheme == "https") {
    client->enable_server_certificate_verification(!s.insecure);
    if (!s.ca_cert_path.empty()) client->set_ca_cert_path(s.ca_cert_path);
  }
  return client;
}

double Percentile(std::vector<double>& values, double q) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<size_t>(rank, 1, values.size()) - 1];
}

double Millis(Steady::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

bool Marked(const httplib::Result& res) { return res->has_header(gateway::kMarkerHeader); }

std::string RunId() {
  const Bytes b = crypto::DefaultRandom().Generate(4);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (uint8_t v : b) {
    out.push_back(kHex[v >> 4]);
    out.push_back(kHex[v & 15]);
  }
  return out;
}

enum class Outcome { kForwarded, kBlocked, kFailed };

// Per-second buckets keyed by completion time since the run started.
class Recorder {
 public:
  explicit Recorder(Steady::time_point start) : start_(start) {}

  void Record(Steady::time_point sent, Outcome outcome, std::string_view failure = {},
              bool server_error = false) {
    const auto done = Steady::now();
    const int second = static_cast<int>(std::chrono::duration_cast<std::chrono::seconds>(done - start_).count());
    std::lock_guard lock(mutex_);
    Bucket& b = BucketLocked(second);
    ++b.requests;
    b.latencies.push_back(Millis(done - sent));
    switch (outcome) {
      case Outcome::kForwarded: ++forwarded_; break;
      case Outcome::kBlocked: ++blocked_; break;
      case Outcome::kFailed:
        ++b.failures;
        ++failure_reasons_[std::string(failure)];
        break;
    }
    if (server_error) ++server_errors_;
  }

  void NoteCeremony() {
    std::lock_guard lock(mutex_);
    ++ceremonies_;
  }

  void NoteActive(int active) {
    const int second = static_cast<int>(
        std::chrono::duration_cast<std::chrono::seconds>(Steady::now() - start_).count());
    std::lock_guard lock(mutex_);
    Bucket& b = BucketLocked(second);
    b.active = std::max(b.active, active);
  }

  // Seconds [steady_from, steady_to) form the hold window.
  BenchReport Build(std::string workload, const OriginStub* stub, const std::string& user_agent,
                    int steady_from, int steady_to) {
    std::lock_guard lock(mutex_);
    BenchReport r;
    r.workload = std::move(workload);
    r.blocked_at_gateway = blocked_;
    r.client_observed_forwarded = forwarded_;
    r.server_errors = server_errors_;
    r.ceremonies = ceremonies_;
    r.failure_reasons = failure_reasons_;
    if (stub) {
      r.forwarded_to_origin = stub->arrivals_for(user_agent);
      r.forwarded_source = "origin_stub";
    } else {
      r.forwarded_to_origin = forwarded_;
      r.forwarded_source = "client";
    }
    std::vector<double> all;
    std::vector<double> steady;
    uint64_t steady_requests = 0;
    int active = 0;
    for (size_t i = 0; i < buckets_.size(); ++i) {
      Bucket& b = buckets_[i];
      r.requests_total += b.requests;
      r.failures_total += b.failures;
      all.insert(all.end(), b.latencies.begin(), b.latencies.end());
      const int second = static_cast<int>(i);
      if (second >= steady_from && second < steady_to) {
        steady.insert(steady.end(), b.latencies.begin(), b.latencies.end());
        steady_requests += b.requests;
      }
      if (b.active > 0) active = b.active;
      SecondSample sample;
      sample.second = second;
      sample.requests = b.requests;
      sample.failures = b.failures;
      sample.active_users = b.active > 0 ? b.active : active;
      std::vector<double> lat = b.latencies;
      sample.p50_ms = Percentile(lat, 0.50);
      sample.p95_ms = Percentile(lat, 0.95);
      r.series.push_back(sample);
    }
    r.latency_p50_ms = Percentile(all, 0.50);
    r.latency_p95_ms = Percentile(all, 0.95);
    r.latency_p99_ms = Percentile(all, 0.99);
    r.steady_seconds = std::max(0, steady_to - steady_from);
    r.steady_rps = r.steady_seconds > 0 ? static_cast<double>(steady_requests) / r.steady_seconds : 0;
    r.steady_p50_ms = Percentile(steady, 0.50);
    return r;
  }

 private:
  struct Bucket {
    uint64_t requests = 0;
    uint64_t failures = 0;
    int active = 0;
    std::vector<double> latencies;
  };

  Bucket& BucketLocked(int second) {
    const size_t i = static_cast<size_t>(std::max(0, second));
    if (buckets_.size() <= i) buckets_.resize(i + 1);
    return buckets_[i];
  }

  const Steady::time_point start_;
  std::mutex mutex_;
  std::vector<Bucket> buckets_;
  uint64_t forwarded_ = 0;
  uint64_t blocked_ = 0;
  uint64_t server_errors_ = 0;
  uint64_t ceremonies_ = 0;
  std::map<std::string, uint64_t> failure_reasons_;
};

std::string TransportFailure(const httplib::Result& res) {
  return "transport:" + httplib::to_string(res.error());
}

// Sleeps in short slices so a stop request is honoured promptly.
void Pause(std::chrono::milliseconds total, const std::atomic<bool>& stop) {
  const auto until = Steady::now() + total;
  while (!stop.load() && Steady::now() < until)
    std::this_thread::sleep_for(std::min<Steady::duration>(std::chrono::milliseconds(50), until - Steady::now()));
}

void SleepUntil(Steady::time_point t) {
  const auto now = Steady::now();
  if (t > now) std::this_thread::sleep_for(t - now);
}

// One simulated human: a ceremony, then cookie-bearing page requests with
// think time in between. A rejected cookie triggers a fresh ceremony.
class VerifiedUser {
 public:
  VerifiedUser(const BenchScenario& s, const Target& target, Recorder& rec, std::string user_agent)
      : s_(s), target_(target), rec_(rec), user_agent_(std::move(user_agent)) {}

  void Run() {
    auto client = MakeClient(s_, target_);
    std::mt19937_64 rng(std::random_device{}());
    std::uniform_int_distribution<int64_t> think(s_.think_min.count(), s_.think_max.count());
    std::string cookie;
    while (!stop_.load()) {
      if (cookie.empty()) {
        cookie = Ceremony(*client);
        if (cookie.empty()) {
          Pause(std::chrono::milliseconds(think(rng)), stop_);
          continue;
        }
      }
      const httplib::Headers headers = {{"User-Agent", user_agent_},
                                        {"Accept", "text/html,application/xhtml+xml,*/*;q=0.8"},
                                        {"Cookie", cookie}};
      const auto sent = Steady::now();
      const httplib::Result res = client->Get(s_.path, headers);
      if (!res) {
        rec_.Record(sent, Outcome::kFailed, TransportFailure(res));
      } else if (res->status >= 500) {
        rec_.Record(sent, Outcome::kFailed, "status:" + std::to_string(res->status), true);
      } else if (Marked(res)) {
        rec_.Record(sent, Outcome::kFailed, "cookie_not_accepted");
        cookie.clear();
      } else {
        rec_.Record(sent, Outcome::kForwarded);
      }
      Pause(std::chrono::milliseconds(think(rng)), stop_);
    }
  }

  void RequestStop() { stop_ = true; }

 private:
  std::string Ceremony(httplib::Client& client) {
    rec_.NoteCeremony();
    const httplib::Headers headers = {{"User-Agent", user_agent_}, {"Accept", "application/json"}};
    auto sent = Steady::now();
    const httplib::Result issued = client.Get("/__cahicha/challenge", headers);
    if (!issued) {
      rec_.Record(sent, Outcome::kFailed, TransportFailure(issued));
      return {};
    }
    if (issued->status != 200 || !Marked(issued)) {
      rec_.Record(sent, Outcome::kFailed, "challenge_status:" + std::to_string(issued->status),
                  issued->status >= 500);
      return {};
    }
    rec_.Record(sent, Outcome::kBlocked);

    std::string body;
    try {
      const json j = json::parse(issued->body);
      const engine::CreationOptions options = engine::CreationOptions::FromJson(j);
      std::string origin = s_.origin;
      if (origin.empty()) {
        const int default_port = target_.scheme == "https" ? 443 : 80;
        origin = target_.scheme + "://" + options.rp_id;
        if (target_.port != default_port) origin += ":" + std::to_string(target_.port);
      }
      softauth::SoftAuthenticator authenticator;
      authenticator.set_attestation_identity(s_.identity);
      softauth::AuthenticatorBehavior behavior;
      behavior.attestation = s_.attestation;
      behavior.aaguid = s_.aaguid;
      const engine::AttestationResponse response = authenticator.CreateCredential(
          options, origin, behavior, j.at("record_id").get<std::string>());
      body = softauth::ResponseToJson(response, s_.path).dump();
    } catch (const std::exception& e) {
      rec_.Record(Steady::now(), Outcome::kFailed, std::string("ceremony:") + e.what());
      return {};
    }

    sent = Steady::now();
    const httplib::Result verified = client.Post("/__cahicha/verify", headers, body, "application/json");
    if (!verified) {
      rec_.Record(sent, Outcome::kFailed, TransportFailure(verified));
      return {};
    }
    const std::string set_cookie = verified->get_header_value("Set-Cookie");
    if (verified->status != 303 || set_cookie.empty()) {
      std::string reason = "verify_status:" + std::to_string(verified->status);
      try {
        reason += ":" + json::parse(verified->body).value("error", std::string());
      } catch (const json::exception&) {
      }
      rec_.Record(sent, Outcome::kFailed, reason, verified->status >= 500);
      return {};
    }
    rec_.Record(sent, Outcome::kBlocked);
    return set_cookie.substr(0, set_cookie.find(';'));
  }

  const BenchScenario& s_;
  const Target& target_;
  Recorder& rec_;
  const std::string user_agent_;
  std::atomic<bool> stop_{false};
};

void Flood(const BenchScenario& s, const Target& target, Recorder& rec, const std::string& user_agent,
           Steady::time_point deadline, const std::atomic<bool>& abort) {
  auto client = MakeClient(s, target);
  // HOIC-like: the same headers on every request, no cookies, no ceremony.
  const httplib::Headers headers = {{"User-Agent", user_agent},
                                    {"Accept", "*/*"},
                                    {"Accept-Language", "en-US,en;q=0.9"},
                                    {"Cache-Control", "no-cache"}};
  uint64_t n = 0;
  while (Steady::now() < deadline && !abort.load()) {
    const auto sent = Steady::now();
    httplib::Result res = (n++ % 2 == 0)
                              ? client->Get("/?q=" + std::to_string(n), headers)
                              : client->Post("/login", headers, "user=admin&pass=admin",
                                             "application/x-www-form-urlencoded");
    if (!res) {
      rec.Record(sent, Outcome::kFailed, TransportFailure(res));
    } else if (res->status >= 500) {
      rec.Record(sent, Outcome::kFailed, "status:" + std::to_string(res->status), true);
    } else if (Marked(res)) {
      rec.Record(sent, Outcome::kBlocked);
    } else {
      rec.Record(sent, Outcome::kForwarded);
    }
  }
}

void Probe(const BenchScenario& s, const Target& target) {
  BenchScenario quick = s;
  quick.request_timeout = std::chrono::seconds(5);
  auto client = MakeClient(quick, target);
  const httplib::Result res = client->Get("/__cahicha/ping", {{"User-Agent", "cahicha-loadbench probe"}});
  if (!res)
    throw TargetUnreachable("cannot reach " + s.target_url + ": " + httplib::to_string(res.error()));
}

int SecondsSince(Steady::time_point start, Steady::time_point t, bool round_up) {
  const double s = std::chrono::duration<double>(t - start).count();
  return static_cast<int>(round_up ? std::ceil(s) : std::floor(s));
}

struct Plan {
  bool verified_ramp = true;  // ramp users up and down around the hold
  bool flood = false;
  bool verified_primary = true;
};

BenchReport Run(const BenchScenario& s, const OriginStub* stub, Plan plan) {
  s.Validate();
  const Target target = ParseTarget(s.target_url);
  Probe(s, target);

  const std::string run_id = RunId();
  const std::string verified_agent = "cahicha-loadbench/1 verified " + run_id;
  const std::string flood_agent = "Mozilla/5.0 (Windows NT 10.0; Win64; x64) flood/" + run_id;

  const auto start = Steady::now();
  Recorder verified_rec(start);
  Recorder flood_rec(start);
  const auto interval = std::chrono::duration_cast<Steady::duration>(
      std::chrono::duration<double>(1.0 / s.spawn_rate));

  std::vector<std::unique_ptr<VerifiedUser>> users;
  std::vector<std::thread> user_threads;
  for (int i = 0; i < s.users; ++i) {
    if (plan.verified_ramp) SleepUntil(start + i * interval);
    users.push_back(std::make_unique<VerifiedUser>(s, target, verified_rec, verified_agent));
    user_threads.emplace_back([u = users.back().get()] { u->Run(); });
    verified_rec.NoteActive(i + 1);
  }
  const auto hold_start = Steady::now();
  const auto hold_end = hold_start + std::chrono::seconds(s.duration_seconds);

  std::atomic<bool> abort{false};
  std::vector<std::thread> flooders;
  if (plan.flood) {
    for (int i = 0; i < s.flood_threads; ++i)
      flooders.emplace_back([&] { Flood(s, target, flood_rec, flood_agent, hold_end, abort); });
  }

  // Active-user samples for every second of the hold.
  while (Steady::now() < hold_end) {
    verified_rec.NoteActive(s.users);
    std::this_thread::sleep_for(std::min<Steady::duration>(std::chrono::seconds(1), hold_end - Steady::now()));
  }
  for (std::thread& t : flooders) t.join();

  for (int i = s.users - 1; i >= 0; --i) {
    if (plan.verified_ramp) SleepUntil(hold_end + (s.users - 1 - i) * interval);
    users[i]->RequestStop();
    verified_rec.NoteActive(i);
  }
  for (std::thread& t : user_threads) t.join();
  const double wall = std::chrono::duration<double>(Steady::now() - start).count();

  const int steady_from = SecondsSince(start, hold_start, true);
  const int steady_to = SecondsSince(start, hold_end, false);
  BenchReport verified = verified_rec.Build("verified", stub, verified_agent, steady_from, steady_to);
  verified.wall_seconds = wall;
  if (!plan.flood) return verified;

  BenchReport flood = flood_rec.Build("flood", stub, flood_agent, steady_from, steady_to);
  flood.wall_seconds = wall;
  if (plan.verified_primary) {
    verified.concurrent.push_back(std::move(flood));
    return verified;
  }
  if (s.users > 0) flood.concurrent.push_back(std::move(verified));
  return flood;
}

json SeriesJson(const BenchReport& r) {
  json rps = json::array(), failures = json::array(), p50 = json::array(), p95 = json::array(),
       active = json::array();
  for (const SecondSample& s : r.series) {
    rps.push_back(s.requests);
    failures.push_back(s.failures);
    p50.push_back(s.p50_ms);
    p95.push_back(s.p95_ms);
    active.push_back(s.active_users);
  }
  return {{"rps", rps}, {"failures", failures}, {"p50_ms", p50}, {"p95_ms", p95}, {"active_users", active}};
}

}  // namespace

std::string_view ScenarioName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kVerifiedLoad: return "verified";
    case ScenarioKind::kBotFlood: return "flood";
    case ScenarioKind::kMixed: return "mixed";
  }
  return "unknown";
}

void BenchScenario::Validate() const {
  const int min_users = kind == ScenarioKind::kBotFlood ? 0 : 1;
  if (users < min_users) throw std::invalid_argument("users must be at least " + std::to_string(min_users));
  if (duration_seconds < 1) throw std::invalid_argument("duration must be at least 1 s");
  if (kind != ScenarioKind::kVerifiedLoad && flood_threads < 1)
    throw std::invalid_argument("flood needs at least one thread");
  if (spawn_rate <= 0) throw std::invalid_argument("spawn rate must be positive");
  if (think_min > think_max) throw std::invalid_argument("think time range is inverted");
  if (target_url.empty()) throw std::invalid_argument("target URL is required");
}

bool BenchReport::AccountingHoldsEverywhere() const {
  if (!AccountingHolds()) return false;
  return std::all_of(concurrent.begin(), concurrent.end(),
                     [](const BenchReport& r) { return r.AccountingHoldsEverywhere(); });
}

BenchReport RunVerifiedLoad(const BenchScenario& scenario, const OriginStub* stub) {
  return Run(scenario, stub, {true, false, true});
}

BenchReport RunBotFlood(const BenchScenario& scenario, const OriginStub* stub) {
  return Run(scenario, stub, {false, true, false});
}

BenchReport RunMixed(const BenchScenario& scenario, const OriginStub* stub) {
  return Run(scenario, stub, {true, true, true});
}

BenchReport RunScenario(const BenchScenario& scenario, const OriginStub* stub) {
  switch (scenario.kind) {
    case ScenarioKind::kVerifiedLoad: return RunVerifiedLoad(scenario, stub);
    case ScenarioKind::kBotFlood: return RunBotFlood(scenario, stub);
    case ScenarioKind::kMixed: return RunMixed(scenario, stub);
  }
  throw std::invalid_argument("unknown scenario");
}

nlohmann::ordered_json ReportToJson(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["workload"] = r.workload;
  j["requests_total"] = r.requests_total;
  j["failures_total"] = r.failures_total;
  j["forwarded_to_origin"] = r.forwarded_to_origin;
  j["forwarded_source"] = r.forwarded_source;
  j["blocked_at_gateway"] = r.blocked_at_gateway;
  j["accounting_holds"] = r.AccountingHolds();
  j["server_errors"] = r.server_errors;
  j["client_observed_forwarded"] = r.client_observed_forwarded;
  j["ceremonies"] = r.ceremonies;
  j["latency_p50_ms"] = r.latency_p50_ms;
  j["latency_p95_ms"] = r.latency_p95_ms;
  j["latency_p99_ms"] = r.latency_p99_ms;
  j["steady_seconds"] = r.steady_seconds;
  j["steady_rps"] = r.steady_rps;
  j["steady_p50_ms"] = r.steady_p50_ms;
  j["wall_seconds"] = r.wall_seconds;
  j["failure_reasons"] = r.failure_reasons;
  j["series"] = SeriesJson(r);
  nlohmann::ordered_json concurrent = nlohmann::ordered_json::array();
  for (const BenchReport& c : r.concurrent) concurrent.push_back(ReportToJson(c));
  j["concurrent"] = concurrent;
  return j;
}

std::string ReportToCsv(const BenchReport& report) {
  std::ostringstream out;
  out << "second,requests,failures,p50_ms,p95_ms\n";
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const SecondSample& s : report.series)
    out << s.second << ',' << s.requests << ',' << s.failures << ',' << s.p50_ms << ',' << s.p95_ms << '\n';
  return out.str();
}

void EmitReport(const BenchReport& report, const std::filesystem::path& path) {
  if (!report.AccountingHoldsEverywhere()) {
    throw AccountingViolation("requests_total != forwarded_to_origin + blocked_at_gateway + failures_total");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  if (path.extension() == ".csv") {
    out << ReportToCsv(report);
  } else {
    out << ReportToJson(report).dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("cannot write report " + path.string());
}

}  // namespace cahicha::loadbench
