// cahicha-gateway: the verifying reverse proxy.
//
// Settings are layered: built-in defaults, then --config, then CAHICHA_*
// environment variables, then command-line flags.

#include <pthread.h>
#include <signal.h>

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "cahicha/gateway/config.h"
#include "cahicha/gateway/server.h"

namespace gw = cahicha::gateway;

int main(int argc, char** argv) {
  CLI::App app{"Reverse proxy that admits clients after a FIDO2 attestation ceremony."};
  std::string config_path;
  std::string listen;
  std::string upstream;
  std::string mode;
  bool unsafe_no_tls = false;
  std::string tls_cert;
  std::string tls_key;
  std::vector<std::string> settings;
  bool check_only = false;
  app.add_option("--config", config_path, "TOML-style key = value file");
  app.add_option("--listen", listen, "host:port to accept connections on");
  app.add_option("--upstream", upstream, "Origin URL, e.g. http://127.0.0.1:8080");
  app.add_option("--mode", mode, "strict or general")->check(CLI::IsMember({"strict", "general"}, CLI::ignore_case));
  app.add_flag("--unsafe-no-tls", unsafe_no_tls, "Serve plaintext HTTP (loopback only)");
  app.add_option("--tls-cert", tls_cert, "PEM certificate chain");
  app.add_option("--tls-key", tls_key, "PEM private key");
  app.add_option("--set", settings, "Any setting as key=value; repeatable");
  app.add_flag("--check", check_only, "Validate the configuration and exit");
  CLI11_PARSE(app, argc, argv);

  gw::GatewayConfig config;
  gw::GatewayRuntime runtime;
  try {
    if (!config_path.empty()) gw::ApplyConfigFile(config, config_path);
    gw::ApplyEnvironment(config);
    for (const std::string& kv : settings) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) throw gw::ConfigError("--set expects key=value, got '" + kv + "'");
      gw::ApplySetting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!listen.empty()) config.listen_address = listen;
    if (!upstream.empty()) config.upstream_origin = upstream;
    if (!mode.empty()) gw::ApplySetting(config, "mode", mode);
    if (unsafe_no_tls) config.unsafe_no_tls = true;
    if (!tls_cert.empty()) config.tls_cert_path = tls_cert;
    if (!tls_key.empty()) config.tls_key_path = tls_key;
    runtime = gw::BuildGateway(config);
  } catch (const std::exception& e) {
    std::cerr << "cahicha-gateway: " << e.what() << '\n';
    return 2;
  }
  for (const std::string& w : runtime.warnings) std::cerr << "cahicha-gateway: warning: " << w << '\n';
  if (check_only) {
    std::cerr << "configuration ok\n";
    return 0;
  }

  // Signals are taken synchronously by a dedicated thread; every other
  // thread inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    gw::GatewayServer server(config, runtime.gateway);
    server.Bind();
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      server.Stop();
    });
    waiter.detach();
    std::cerr << "cahicha-gateway: " << server.url() << " -> " << config.UpstreamUrl() << " ("
              << cahicha::engine::ModeName(config.mode) << " mode, origins";
    for (const std::string& o : config.EffectiveOrigins()) std::cerr << ' ' << o;
    std::cerr << ")\n";
    server.Serve();
  } catch (const std::exception& e) {
    std::cerr << "cahicha-gateway: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
