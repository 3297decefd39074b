// loadbench: verified-load and flood runs against a gateway, with an
// optional in-process origin stub that counts what gets through.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cahicha/loadbench/bench.h"
#include "cahicha/loadbench/local_deployment.h"
#include "cahicha/mds/trust_store.h"

namespace lb = cahicha::loadbench;

namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void PrintSummary(const lb::BenchReport& r, const std::string& indent = "") {
  std::cout << indent << r.workload << ": requests=" << r.requests_total << " failures=" << r.failures_total
            << " forwarded=" << r.forwarded_to_origin << " (" << r.forwarded_source << ")"
            << " blocked=" << r.blocked_at_gateway << " 5xx=" << r.server_errors
            << " p50=" << r.latency_p50_ms << "ms p95=" << r.latency_p95_ms << "ms p99=" << r.latency_p99_ms
            << "ms steady_rps=" << r.steady_rps << " steady_p50=" << r.steady_p50_ms << "ms"
            << " accounting=" << (r.AccountingHolds() ? "ok" : "VIOLATED") << '\n';
  for (const auto& [reason, count] : r.failure_reasons)
    std::cout << indent << "  failure " << reason << ": " << count << '\n';
  for (const lb::BenchReport& c : r.concurrent) PrintSummary(c, indent + "  ");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load and flood generator for the verifying gateway."};
  app.require_subcommand(1);

  lb::BenchScenario scenario;
  std::string report_path;
  std::optional<int> stub_port;
  bool local = false;
  std::string attestation = "packed-self";
  std::string aaguid_text;
  std::string attestation_key;
  std::string attestation_chain;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--target", scenario.target_url, "Gateway URL, e.g. https://127.0.0.1:8443");
    cmd->add_option("--duration", scenario.duration_seconds, "Hold time in seconds")->capture_default_str();
    cmd->add_option("--report", report_path, "Write out.json or out.csv");
    cmd->add_option("--origin-stub-port", stub_port,
                    "Run the counting origin stub on this port (the gateway's upstream)");
    cmd->add_flag("--local", local, "Start a stub and a TLS gateway in-process and target them");
    cmd->add_option("--path", scenario.path, "Path verified clients request")->capture_default_str();
    cmd->add_option("--spawn-rate", scenario.spawn_rate, "Users started per second")->capture_default_str();
    cmd->add_option("--origin", scenario.origin, "Origin claimed in client data (default from rp.id)");
    cmd->add_option("--ca-cert", scenario.ca_cert_path, "CA file for the gateway certificate");
    cmd->add_flag("--insecure", scenario.insecure, "Skip TLS certificate verification");
    cmd->add_option("--attestation", attestation, "packed-self, packed-x5c or none")
        ->check(CLI::IsMember({"packed-self", "packed-x5c", "none"}))
        ->capture_default_str();
    cmd->add_option("--aaguid", aaguid_text, "AAGUID claimed by the soft authenticator");
    cmd->add_option("--attestation-key", attestation_key, "PEM key for packed-x5c");
    cmd->add_option("--attestation-chain", attestation_chain, "PEM chain for packed-x5c, leaf first");
  };

  CLI::App* verified = app.add_subcommand("verified", "Verified users: ceremony once, then cookie requests");
  add_common(verified);
  verified->add_option("--users", scenario.users, "Concurrent users at hold")->capture_default_str();

  CLI::App* flood = app.add_subcommand("flood", "Cookie-less flood with uniform headers");
  add_common(flood);
  int flood_users = 1;
  flood->add_option("--threads", scenario.flood_threads, "Flood threads")->capture_default_str();
  flood->add_option("--users", flood_users, "Verified clients running alongside")->capture_default_str();

  CLI::App* mixed = app.add_subcommand("mixed", "Verified load with a flood during the hold");
  add_common(mixed);
  mixed->add_option("--users", scenario.users, "Concurrent users at hold")->capture_default_str();
  mixed->add_option("--threads", scenario.flood_threads, "Flood threads")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (flood->parsed()) {
    scenario.kind = lb::ScenarioKind::kBotFlood;
    scenario.users = flood_users;
  } else if (mixed->parsed()) {
    scenario.kind = lb::ScenarioKind::kMixed;
  }

  lb::BenchReport report;
  try {
    if (attestation == "packed-x5c") {
      scenario.attestation = cahicha::softauth::AttestationMode::kPackedX5c;
      if (attestation_key.empty() || attestation_chain.empty())
        throw std::invalid_argument("packed-x5c needs --attestation-key and --attestation-chain");
      scenario.identity = std::make_shared<cahicha::softauth::AttestationIdentity>(
          cahicha::softauth::LoadAttestationIdentity(ReadFile(attestation_key), ReadFile(attestation_chain)));
    } else if (attestation == "none") {
      scenario.attestation = cahicha::softauth::AttestationMode::kNone;
    }
    if (!aaguid_text.empty()) {
      const auto aaguid = cahicha::mds::ParseAaguid(aaguid_text);
      if (!aaguid) throw std::invalid_argument("bad --aaguid");
      scenario.aaguid = *aaguid;
    }

    std::unique_ptr<lb::LocalDeployment> deployment;
    std::unique_ptr<lb::OriginStub> stub;
    const lb::OriginStub* counting = nullptr;
    if (local) {
      lb::LocalDeploymentOptions options;
      if (stub_port) options.stub_port = *stub_port;
      deployment = std::make_unique<lb::LocalDeployment>(options);
      scenario.target_url = deployment->url();
      scenario.ca_cert_path = deployment->ca_cert_path();
      counting = &deployment->stub();
      std::cerr << "loadbench: local gateway " << deployment->url() << " -> stub " << deployment->stub().url()
                << '\n';
    } else if (stub_port) {
      stub = std::make_unique<lb::OriginStub>("127.0.0.1", *stub_port);
      stub->Start();
      counting = stub.get();
      std::cerr << "loadbench: origin stub on " << stub->url() << '\n';
    }
    report = lb::RunScenario(scenario, counting);
  } catch (const lb::TargetUnreachable& e) {
    std::cerr << "loadbench: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "loadbench: " << e.what() << '\n';
    return 1;
  }

  PrintSummary(report);
  if (!report.AccountingHoldsEverywhere()) {
    std::cerr << "loadbench: accounting identity violated; report not written\n";
    return 2;
  }
  if (!report_path.empty()) {
    try {
      lb::EmitReport(report, report_path);
    } catch (const std::exception& e) {
      std::cerr << "loadbench: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
