#ifndef CAHICHA_LOADBENCH_LOCAL_DEPLOYMENT_H_
#define CAHICHA_LOADBENCH_LOCAL_DEPLOYMENT_H_

#include <filesystem>
#include <memory>
#include <string>

#include "cahicha/gateway/server.h"
#include "cahicha/loadbench/origin_stub.h"

namespace cahicha::loadbench {

struct LocalDeploymentOptions {
  engine::Mode mode = engine::Mode::kGeneral;
  bool tls = true;
  int stub_port = 0;
  // Written to the scratch directory and configured when non-empty.
  std::string mds_blob;
  std::string mds_root_pem;
  int64_t worker_threads = 128;
  // Also receives every access record, e.g. a stdout stream.
  std::shared_ptr<gateway::AccessLog> extra_log;
};

// An origin stub plus a gateway in front of it, both on loopback with
// ephemeral ports, TLS from a throwaway localhost certificate. Everything
// lives in a scratch directory removed on destruction.
class LocalDeployment {
 public:
  explicit LocalDeployment(LocalDeploymentOptions options = {});
  ~LocalDeployment();

  LocalDeployment(const LocalDeployment&) = delete;
  LocalDeployment& operator=(const LocalDeployment&) = delete;

  OriginStub& stub() { return *stub_; }
  gateway::GatewayServer& server() { return *server_; }
  gateway::MemoryAccessLog& access_log() { return *memory_log_; }
  const gateway::GatewayConfig& config() const { return config_; }
  const gateway::Gateway& gateway() const { return *runtime_.gateway; }

  // https://127.0.0.1:<port>
  std::string url() const { return server_->url(); }
  // The TLS certificate, usable as a CA file for clients.
  std::string ca_cert_path() const { return (dir_ / "tls.crt").string(); }
  // Browser-equivalent origin: scheme://localhost:<port>.
  std::string origin() const;

 private:
  std::filesystem::path dir_;
  gateway::GatewayConfig config_;
  std::shared_ptr<gateway::MemoryAccessLog> memory_log_;
  std::unique_ptr<OriginStub> stub_;
  gateway::GatewayRuntime runtime_;
  std::unique_ptr<gateway::GatewayServer> server_;
};

}  // namespace cahicha::loadbench

#endif  // CAHICHA_LOADBENCH_LOCAL_DEPLOYMENT_H_
