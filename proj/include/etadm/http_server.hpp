#pragma once

// HTTP + server-sent-events front end over a SessionManager.
//
//   POST /api/sessions                 {"policy": "rules"|"model"|"hybrid"}
//   POST /api/sessions/{id}/turns      {"utterance": "...", "frame": {...}?}
//   GET  /api/sessions/{id}
//   GET  /api/sessions/{id}/stream     text/event-stream of trace messages
//   GET  /api/model
//   POST /api/model                    {"path": "model.json"}

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "etadm/error.hpp"
#include "etadm/service.hpp"

namespace etadm {

// Status code an error maps to on the wire.
int http_status_for(ErrorCode code);
nlohmann::json error_json(const Error& error);

class HttpServer {
 public:
  // `static_dir`, when given, is served at / (the browser demo).
  explicit HttpServer(SessionManager& manager, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  bool bind(const std::string& host, int port);
  // Returns the chosen port, or -1.
  int bind_any_port(const std::string& host);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace etadm
