#include "cahicha/loadbench/local_deployment.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fstream>
#include <system_error>

#include "cahicha/crypto/random.h"
#include "cahicha/softauth/fixture_pki.h"

namespace cahicha::loadbench {
namespace {

namespace fs = std::filesystem;

void WriteFile(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path MakeScratchDir() {
  const Bytes suffix = crypto::DefaultRandom().Generate(6);
  std::string name = "cahicha-";
  static constexpr char kHex[] = "0123456789abcdef";
  for (uint8_t b : suffix) {
    name.push_back(kHex[b >> 4]);
    name.push_back(kHex[b & 15]);
  }
  const fs::path dir = fs::temp_directory_path() / name;
  fs::create_directories(dir);
  fs::permissions(dir, fs::perms::owner_all);
  return dir;
}

int FreeLoopbackPort() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof addr;
  const bool ok = ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
                  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0;
  ::close(fd);
  if (!ok) throw std::runtime_error("no free loopback port");
  return ntohs(addr.sin_port);
}

}  // namespace

LocalDeployment::LocalDeployment(LocalDeploymentOptions options) : dir_(MakeScratchDir()) {
  try {
    stub_ = std::make_unique<OriginStub>("127.0.0.1", options.stub_port);
    stub_->Start();

    config_.listen_address = "127.0.0.1:0";
    config_.upstream_origin = stub_->url();
    config_.mode = options.mode;
    config_.worker_threads = options.worker_threads;
    config_.token_key_path = (dir_ / "token.key").string();
    config_.access_log_path.clear();
    if (options.tls) {
      const softauth::KeyAndCertificate tls = softauth::MakeLocalhostTlsCertificate();
      WriteFile(dir_ / "tls.crt", tls.pem());
      WriteFile(dir_ / "tls.key", tls.private_key_pem());
      config_.tls_cert_path = (dir_ / "tls.crt").string();
      config_.tls_key_path = (dir_ / "tls.key").string();
    } else {
      config_.unsafe_no_tls = true;
    }
    if (!options.mds_blob.empty()) {
      WriteFile(dir_ / "mds.jwt", options.mds_blob);
      WriteFile(dir_ / "mds_root.pem", options.mds_root_pem);
      config_.mds_blob_path = (dir_ / "mds.jwt").string();
      config_.mds_root_path = (dir_ / "mds_root.pem").string();
    }

    // The expected origin embeds the listen port, so pick it up front.
    config_.listen_address = "127.0.0.1:" + std::to_string(FreeLoopbackPort());

    memory_log_ = std::make_shared<gateway::MemoryAccessLog>();
    std::shared_ptr<gateway::AccessLog> log = memory_log_;
    if (options.extra_log) {
      log = std::make_shared<gateway::TeeAccessLog>(
          std::vector<std::shared_ptr<gateway::AccessLog>>{memory_log_, options.extra_log});
    }
    runtime_ = gateway::BuildGateway(config_, log);
    server_ = std::make_unique<gateway::GatewayServer>(config_, runtime_.gateway);
    server_->Start();
  } catch (...) {
    if (stub_) stub_->Stop();
    std::error_code ec;
    fs::remove_all(dir_, ec);
    throw;
  }
}

LocalDeployment::~LocalDeployment() {
  if (server_) server_->Stop();
  // Dropping the gateway closes its pooled upstream connections, so the
  // stub does not sit out their keep-alive timeout.
  server_.reset();
  runtime_ = {};
  if (stub_) stub_->Stop();
  std::error_code ec;
  fs::remove_all(dir_, ec);
}

std::string LocalDeployment::origin() const {
  return std::string(config_.unsafe_no_tls ? "http" : "https") + "://localhost:" +
         std::to_string(server_->port());
}

}  // namespace cahicha::loadbench
