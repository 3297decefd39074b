#ifndef CAHICHA_GATEWAY_SERVER_H_
#define CAHICHA_GATEWAY_SERVER_H_

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "cahicha/gateway/config.h"
#include "cahicha/gateway/gateway.h"
#include "cahicha/mds/trust_store.h"

namespace cahicha::gateway {

struct GatewayRuntime {
  std::shared_ptr<mds::TrustStoreHandle> trust;
  std::shared_ptr<Gateway> gateway;
  // Non-fatal findings from loading, e.g. a stale metadata blob.
  std::vector<std::string> warnings;
};

// Validates |config|, loads the metadata blob, token key and UI bundle, and
// wires up the engine and upstream pool. |access_log| overrides
// config.access_log_path. Throws ConfigError, mds::MdsError or
// std::runtime_error.
GatewayRuntime BuildGateway(const GatewayConfig& config,
                            std::shared_ptr<AccessLog> access_log = nullptr);

class GatewayServer {
 public:
  // Throws ConfigError when the TLS material cannot be loaded.
  GatewayServer(const GatewayConfig& config, std::shared_ptr<Gateway> gateway);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds the listen address and returns the port (useful with port 0).
  // Throws std::runtime_error.
  int Bind();
  // Blocks until Stop(). Binds first if needed.
  void Serve();
  // Serve() on a background thread; returns once connections are accepted.
  void Start();
  void Stop();

  int port() const { return port_; }
  // scheme://host:port as reachable from this machine.
  std::string url() const;

 private:
  HostPort listen_;
  bool tls_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_SERVER_H_
