#include "cahicha/loadbench/origin_stub.h"

#include <charconv>
#include <stdexcept>

namespace cahicha::loadbench {

OriginStub::OriginStub(std::string host, int port, size_t worker_threads, size_t record_limit)
    : host_(std::move(host)), port_(port), record_limit_(record_limit) {
  server_.new_task_queue = [worker_threads] { return new httplib::ThreadPool(worker_threads); };
  server_.set_keep_alive_max_count(100000);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { Handle(req, res); };
  server_.Get(".*", handler);
  server_.Post(".*", handler);
  server_.Put(".*", handler);
  server_.Patch(".*", handler);
  server_.Delete(".*", handler);
  server_.Options(".*", handler);
}

OriginStub::~OriginStub() { Stop(); }

void OriginStub::Start() {
  if (port_ == 0) {
    port_ = server_.bind_to_any_port(host_);
  } else if (!server_.bind_to_port(host_, port_)) {
    port_ = -1;
  }
  if (port_ < 0) throw std::runtime_error("origin stub cannot bind " + host_);
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

void OriginStub::Stop() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::string OriginStub::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

uint64_t OriginStub::arrivals_for(std::string_view user_agent) const {
  std::lock_guard lock(mutex_);
  auto it = by_agent_.find(user_agent);
  return it == by_agent_.end() ? 0 : it->second;
}

std::map<std::string, uint64_t> OriginStub::arrivals_by_user_agent() const {
  std::lock_guard lock(mutex_);
  return {by_agent_.begin(), by_agent_.end()};
}

std::vector<RecordedRequest> OriginStub::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

void OriginStub::Reset() {
  std::lock_guard lock(mutex_);
  arrivals_ = 0;
  by_agent_.clear();
  recorded_.clear();
}

void OriginStub::Handle(const httplib::Request& req, httplib::Response& res) {
  {
    std::lock_guard lock(mutex_);
    ++arrivals_;
    ++by_agent_[req.get_header_value("User-Agent")];
    if (recorded_.size() < record_limit_) recorded_.push_back({req.method, req.target, req.headers, req.body});
  }
  res.set_header("X-Origin-Stub", "1");

  constexpr std::string_view kStatusPrefix = "/status/";
  if (req.path.rfind(kStatusPrefix, 0) == 0) {
    const std::string_view code_text = std::string_view(req.path).substr(kStatusPrefix.size());
    int code = 0;
    const auto [ptr, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
    if (ec == std::errc() && ptr == code_text.data() + code_text.size() && code >= 200 && code < 600) {
      res.status = code;
      res.set_content("origin status " + std::to_string(code), "text/plain");
      return;
    }
  }
  res.status = 200;
  if (req.method == "POST" || req.method == "PUT" || req.method == "PATCH") {
    const std::string type = req.get_header_value("Content-Type");
    res.set_content(req.body, type.empty() ? "application/octet-stream" : type);
  } else {
    res.set_content("origin " + req.method + " " + req.target, "text/plain");
  }
}

}  // namespace cahicha::loadbench
