#include "cahicha/gateway/upstream.h"

#include <stdexcept>

namespace cahicha::gateway {
namespace {

bool Idempotent(const std::string& method) {
  return method == "GET" || method == "HEAD" || method == "OPTIONS" || method == "PUT" ||
         method == "DELETE";
}

}  // namespace

UpstreamPool::UpstreamPool(std::string origin, std::chrono::seconds timeout, size_t max_idle)
    : origin_(std::move(origin)), timeout_(timeout), max_idle_(max_idle) {
  if (!Connect()->is_valid()) throw std::invalid_argument("unusable upstream origin " + origin_);
}

std::unique_ptr<httplib::Client> UpstreamPool::Connect() const {
  auto client = std::make_unique<httplib::Client>(origin_);
  client->set_keep_alive(true);
  client->set_follow_location(false);
  client->set_connection_timeout(timeout_);
  client->set_read_timeout(timeout_);
  client->set_write_timeout(timeout_);
  return client;
}

std::unique_ptr<httplib::Client> UpstreamPool::Acquire() {
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      auto client = std::move(idle_.back());
      idle_.pop_back();
      return client;
    }
  }
  return Connect();
}

void UpstreamPool::Release(std::unique_ptr<httplib::Client> client) {
  std::lock_guard lock(mutex_);
  if (idle_.size() < max_idle_) idle_.push_back(std::move(client));
}

size_t UpstreamPool::idle() const {
  std::lock_guard lock(mutex_);
  return idle_.size();
}

ForwardResult UpstreamPool::Forward(const ForwardRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  ForwardResult out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::unique_ptr<httplib::Client> client = Acquire();
    const bool reused = client->is_socket_open();

    httplib::Request req;
    req.method = request.method;
    req.path = request.target;
    req.headers = request.headers;
    req.body = request.body;

    httplib::Result result = client->send(req);
    if (result) {
      out.status = ForwardStatus::kOk;
      out.http_status = result->status;
      out.headers = std::move(result->headers);
      out.body = std::move(result->body);
      Release(std::move(client));
      return out;
    }

    const httplib::Error error = result.error();
    out.error = httplib::to_string(error);
    // A pooled connection the origin already closed fails on first use;
    // one retry on a fresh connection, only where a repeat is harmless.
    const bool stale = reused && (error == httplib::Error::Write || error == httplib::Error::Read);
    const bool timed_out = std::chrono::steady_clock::now() - start >= timeout_;
    if (attempt == 0 && stale && !timed_out && Idempotent(request.method)) continue;
    break;
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  out.status = elapsed >= timeout_ ? ForwardStatus::kTimeout : ForwardStatus::kUnreachable;
  return out;
}

}  // namespace cahicha::gateway
