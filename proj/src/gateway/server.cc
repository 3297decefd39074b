#include "cahicha/gateway/server.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cahicha/crypto/random.h"

namespace cahicha::gateway {
namespace {

std::string ReadFile(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

GatewayRuntime BuildGateway(const GatewayConfig& config, std::shared_ptr<AccessLog> access_log) {
  config.Validate();
  GatewayRuntime runtime;

  if (!config.mds_blob_path.empty() || !config.mds_root_path.empty()) {
    if (config.mds_blob_path.empty() || config.mds_root_path.empty())
      throw ConfigError("mds_blob_path and mds_root_path go together");
    const std::string blob = ReadFile(config.mds_blob_path, "metadata blob");
    const std::string root = ReadFile(config.mds_root_path, "metadata root certificate");
    mds::LoadOptions options;
    options.expired_blob =
        config.mds_reject_expired ? mds::ExpiredBlobPolicy::kReject : mds::ExpiredBlobPolicy::kWarn;
    mds::LoadResult loaded = mds::LoadMdsBlob(
        blob, ByteView(reinterpret_cast<const uint8_t*>(root.data()), root.size()), options);
    runtime.warnings = std::move(loaded.warnings);
    runtime.trust = std::make_shared<mds::TrustStoreHandle>(std::move(loaded.store));
  }

  GatewayParts parts;
  parts.engine = std::make_shared<engine::VerificationEngine>(config.Policy(), runtime.trust);
  parts.token_key =
      std::make_shared<const token::TokenKey>(token::TokenKey::LoadOrCreate(config.token_key_path));
  parts.upstream = std::make_shared<UpstreamPool>(
      config.UpstreamUrl(), std::chrono::seconds(config.upstream_timeout_seconds));
  parts.access_log = access_log ? std::move(access_log) : OpenAccessLog(config.access_log_path);
  if (!config.ui_bundle_path.empty()) parts.challenge_script = ReadFile(config.ui_bundle_path, "UI bundle");
  runtime.gateway = std::make_shared<Gateway>(config, std::move(parts));
  return runtime;
}

GatewayServer::GatewayServer(const GatewayConfig& config, std::shared_ptr<Gateway> gateway)
    : listen_(ParseHostPort(config.listen_address, 443)), tls_(!config.unsafe_no_tls) {
  if (tls_) {
    auto ssl = std::make_unique<httplib::SSLServer>(config.tls_cert_path.c_str(),
                                                    config.tls_key_path.c_str());
    if (!ssl->is_valid())
      throw ConfigError("cannot load TLS certificate " + config.tls_cert_path + " / key " +
                        config.tls_key_path);
    server_ = std::move(ssl);
  } else {
    server_ = std::make_unique<httplib::Server>();
  }

  const size_t workers = static_cast<size_t>(config.worker_threads);
  server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  server_->set_keep_alive_max_count(1000);

  auto handler = [gateway](const httplib::Request& req, httplib::Response& res) {
    gateway->Handle(req, res);
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Put(".*", handler);
  server_->Patch(".*", handler);
  server_->Delete(".*", handler);
  server_->Options(".*", handler);
}

GatewayServer::~GatewayServer() { Stop(); }

int GatewayServer::Bind() {
  if (port_ >= 0) return port_;
  if (listen_.port == 0) {
    port_ = server_->bind_to_any_port(listen_.host);
  } else {
    port_ = server_->bind_to_port(listen_.host, listen_.port) ? listen_.port : -1;
  }
  if (port_ < 0)
    throw std::runtime_error("cannot listen on " + listen_.host + ":" + std::to_string(listen_.port));
  return port_;
}

void GatewayServer::Serve() {
  Bind();
  server_->listen_after_bind();
}

void GatewayServer::Start() {
  Bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void GatewayServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string GatewayServer::url() const {
  std::string host = listen_.host;
  if (host == "0.0.0.0") host = "127.0.0.1";
  if (host == "::") host = "::1";
  if (host.find(':') != std::string::npos) host = "[" + host + "]";
  return std::string(tls_ ? "https" : "http") + "://" + host + ":" + std::to_string(port_);
}

}  // namespace cahicha::gateway
