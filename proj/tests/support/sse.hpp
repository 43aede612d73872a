#pragma once

// Minimal server-sent-events client for the trace stream.

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace sse {

using nlohmann::json;

inline httplib::Client client(int port) {
  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(10, 0);
  return c;
}

// Collects SSE events from one stream until `want` turn_done events arrive.
class StreamReader {
 public:
  StreamReader(int port, const std::string& id, int want) : want_(want) {
    thread_ = std::thread([port, id, this] {
      auto c = client(port);
      c.Get(
          "/api/sessions/" + id + "/stream",
          [this](const httplib::Response& res) {
            std::lock_guard lock(mu_);
            status_ = res.status;
            connected_ = true;
            cv_.notify_all();
            return true;
          },
          [this](const char* data, std::size_t len) {
            std::lock_guard lock(mu_);
            buffer_.append(data, len);
            parse();
            cv_.notify_all();
            return done_ < want_;
          });
      std::lock_guard lock(mu_);
      connected_ = true;
      finished_ = true;
      cv_.notify_all();
    });
  }
  ~StreamReader() { thread_.join(); }

  int wait_connected() {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::seconds(10), [this] { return connected_; });
    return status_;
  }
  bool malformed() {
    std::lock_guard lock(mu_);
    return malformed_;
  }
  std::vector<std::pair<std::string, json>> wait_done() {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::seconds(10), [this] { return done_ >= want_ || finished_; });
    return events_;
  }

 private:
  void parse() {
    std::size_t end;
    while ((end = buffer_.find("\n\n")) != std::string::npos) {
      const std::string block = buffer_.substr(0, end);
      buffer_.erase(0, end + 2);
      if (block.starts_with(":")) continue;
      const auto nl = block.find('\n');
      if (!block.starts_with("event: ") || nl == std::string::npos || block.compare(nl + 1, 6, "data: ") != 0) {
        malformed_ = true;
        continue;
      }
      const std::string kind = block.substr(7, nl - 7);
      events_.emplace_back(kind, json::parse(block.substr(nl + 7)));
      if (kind == "turn_done") ++done_;
    }
  }

  int want_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::string buffer_;
  std::vector<std::pair<std::string, json>> events_;
  int done_ = 0;
  int status_ = 0;
  bool connected_ = false;
  bool finished_ = false;
  bool malformed_ = false;
  std::thread thread_;
};

}  // namespace sse
