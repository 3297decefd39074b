#include "cahicha/gateway/access_log.h"

#include <cmath>
#include <ctime>
#include <iostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cahicha::gateway {
namespace {

std::string Iso8601(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

double Round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

std::string FormatAccessRecord(const AccessRecord& record) {
  const nlohmann::ordered_json j = {
      {"ts", Iso8601(record.timestamp)},
      {"method", record.method},
      {"path", record.path},
      {"status", record.status},
      {"verdict", record.verdict},
      {"latency_ms", Round3(record.latency_ms)},
      {"total_ms", Round3(record.total_ms)},
  };
  // Paths are attacker-chosen; never let bad UTF-8 take the log down.
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void StreamAccessLog::Write(const AccessRecord& record) {
  const std::string line = FormatAccessRecord(record) + "\n";
  std::lock_guard lock(mutex_);
  out_ << line << std::flush;
}

FileAccessLog::FileAccessLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open access log " + path);
}

void FileAccessLog::Write(const AccessRecord& record) {
  const std::string line = FormatAccessRecord(record) + "\n";
  std::lock_guard lock(mutex_);
  out_ << line;
  out_.flush();
}

void MemoryAccessLog::Write(const AccessRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<AccessRecord> MemoryAccessLog::Records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

void MemoryAccessLog::Clear() {
  std::lock_guard lock(mutex_);
  records_.clear();
}

std::shared_ptr<AccessLog> OpenAccessLog(const std::string& path) {
  if (path.empty()) return std::make_shared<NullAccessLog>();
  if (path == "-") return std::make_shared<StreamAccessLog>(std::cout);
  return std::make_shared<FileAccessLog>(path);
}

}  // namespace cahicha::gateway
