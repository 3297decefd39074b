#ifndef CAHICHA_GATEWAY_ACCESS_LOG_H_
#define CAHICHA_GATEWAY_ACCESS_LOG_H_

#include <chrono>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace cahicha::gateway {

struct AccessRecord {
  std::chrono::system_clock::time_point timestamp;
  std::string method;
  std::string path;
  int status = 0;
  // forwarded, challenged, verified, rejected_<Reason>, not_found,
  // upstream_error or internal.
  std::string verdict;
  // Forwarded requests: handler entry to upstream dispatch. Everything
  // else: handler entry to response ready.
  double latency_ms = 0;
  // Handler entry to response ready, upstream time included.
  double total_ms = 0;
};

// One JSON object, no trailing newline.
std::string FormatAccessRecord(const AccessRecord& record);

class AccessLog {
 public:
  virtual ~AccessLog() = default;
  // Called concurrently from request threads.
  virtual void Write(const AccessRecord& record) = 0;
};

class NullAccessLog final : public AccessLog {
 public:
  void Write(const AccessRecord&) override {}
};

// JSON lines to a stream the caller keeps alive.
class StreamAccessLog final : public AccessLog {
 public:
  explicit StreamAccessLog(std::ostream& out) : out_(out) {}
  void Write(const AccessRecord& record) override;

 private:
  std::mutex mutex_;
  std::ostream& out_;
};

class FileAccessLog final : public AccessLog {
 public:
  // Appends; throws std::runtime_error when the file cannot be opened.
  explicit FileAccessLog(const std::string& path);
  void Write(const AccessRecord& record) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class MemoryAccessLog final : public AccessLog {
 public:
  void Write(const AccessRecord& record) override;
  std::vector<AccessRecord> Records() const;
  void Clear();

 private:
  mutable std::mutex mutex_;
  std::vector<AccessRecord> records_;
};

// Fans out to several sinks.
class TeeAccessLog final : public AccessLog {
 public:
  explicit TeeAccessLog(std::vector<std::shared_ptr<AccessLog>> sinks) : sinks_(std::move(sinks)) {}
  void Write(const AccessRecord& record) override {
    for (const auto& sink : sinks_) sink->Write(record);
  }

 private:
  std::vector<std::shared_ptr<AccessLog>> sinks_;
};

// "-" is stdout, empty is no log, anything else a file.
std::shared_ptr<AccessLog> OpenAccessLog(const std::string& path);

}  // namespace cahicha::gateway

#endif  // CAHICHA_GATEWAY_ACCESS_LOG_H_
