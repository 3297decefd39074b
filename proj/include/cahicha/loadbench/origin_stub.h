#ifndef CAHICHA_LOADBENCH_ORIGIN_STUB_H_
#define CAHICHA_LOADBENCH_ORIGIN_STUB_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>

namespace cahicha::loadbench {

struct RecordedRequest {
  std::string method;
  std::string target;
  httplib::Headers headers;
  std::string body;
};

// Instrumented origin: counts every arrival (in total and per User-Agent)
// and echoes. POST/PUT/PATCH bodies come back verbatim with the request's
// Content-Type; other methods get "origin <METHOD> <target>".
// GET /status/<code> answers with that status.
class OriginStub {
 public:
  explicit OriginStub(std::string host = "127.0.0.1", int port = 0, size_t worker_threads = 96,
                      size_t record_limit = 256);
  ~OriginStub();

  OriginStub(const OriginStub&) = delete;
  OriginStub& operator=(const OriginStub&) = delete;

  // Throws std::runtime_error when the port cannot be bound.
  void Start();
  void Stop();

  int port() const { return port_; }
  std::string url() const;

  uint64_t arrivals() const { return arrivals_.load(); }
  uint64_t arrivals_for(std::string_view user_agent) const;
  std::map<std::string, uint64_t> arrivals_by_user_agent() const;
  // The first record_limit requests.
  std::vector<RecordedRequest> recorded() const;
  void Reset();

 private:
  void Handle(const httplib::Request& req, httplib::Response& res);

  const std::string host_;
  int port_;
  const size_t record_limit_;
  httplib::Server server_;
  std::thread thread_;
  std::atomic<uint64_t> arrivals_{0};
  mutable std::mutex mutex_;
  std::map<std::string, uint64_t, std::less<>> by_agent_;
  std::vector<RecordedRequest> recorded_;
};

}  // namespace cahicha::loadbench

#endif  // CAHICHA_LOADBENCH_ORIGIN_STUB_H_
