#ifndef CAHICHA_GATEWAY_UPSTREAM_H_
#define CAHICHA_GATEWAY_UPSTREAM_H_

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>

namespace cahicha::gateway {

struct ForwardRequest {
  std::string method;
  // Raw request target: path plus query, as received.
  std::string target;
  httplib::Headers headers;
  std::string body;
};

enum class ForwardStatus { kOk, kUnreachable, kTimeout };

struct ForwardResult {
  ForwardStatus status = ForwardStatus::kUnreachable;
  int http_status = 0;
  httplib::Headers headers;
  std::string body;
  std::string error;
};

class Upstream {
 public:
  virtual ~Upstream() = default;
  // Called concurrently.
  virtual ForwardResult Forward(const ForwardRequest& request) = 0;
};

// Keep-alive connections to one origin. Each in-flight request owns a
// client; idle clients go back on a stack for reuse.
class UpstreamPool final : public Upstream {
 public:
  // |origin| is scheme://host[:port]. Throws std::invalid_argument for a
  // URL httplib cannot use.
  UpstreamPool(std::string origin, std::chrono::seconds timeout, size_t max_idle = 256);

  ForwardResult Forward(const ForwardRequest& request) override;

  size_t idle() const;

 private:
  std::unique_ptr<httplib::Client> Acquire();
  std::unique_ptr<httplib::Client> Connect() const;
  void Release(std::unique_ptr<httplib::Client> client);

  const std::string origin_;
  const std::chrono::seconds timeout_;
  const size_t max_idle_;
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_UPSTREAM_H_
