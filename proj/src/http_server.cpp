#include "etadm/http_server.hpp"

#include <atomic>
#include <chrono>

#include <httplib.h>

#include "etadm/serialization.hpp"

namespace etadm {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::Busy:
    case ErrorCode::ModelMissing: return 409;
    case ErrorCode::Io: return 400;
    default: break;
  }
  return is_data_error(code) || code == ErrorCode::InvalidArgument ? 400 : 500;
}

json error_json(const Error& e) {
  return {{"error", to_string(e.code())}, {"message", e.message()}};
}

struct HttpServer::Impl {
  SessionManager& manager;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  explicit Impl(SessionManager& m) : manager(m) {}

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      json j = json::parse(req.body);
      if (!j.is_object()) throw Error(ErrorCode::SchemaError, "request body must be a JSON object");
      return j;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::SchemaError, std::string("malformed JSON body: ") + e.what());
    }
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        reply(res, http_status_for(e.code()), error_json(e));
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
      }
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      const std::string name = body.value("policy", std::string("rules"));
      const auto policy = parse_policy(name);
      if (!policy) throw Error(ErrorCode::InvalidArgument, "unknown policy '" + name + "'");
      auto created = manager.create_session(*policy);
      const auto& rb = manager.rulebook();
      reply(res, 201, {{"id", created.id},
                       {"policy", to_string(*policy)},
                       {"response", created.opening.response},
                       {"turn", turn_to_json(created.opening, rb)}});
    });

    server.Post(R"(/api/sessions/([^/]+)/turns)", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto it = body.find("utterance");
      if (it == body.end() || !it->is_string()) {
        throw Error(ErrorCode::SchemaError, "body needs a string 'utterance'");
      }
      std::optional<SemanticFrame> frame;
      if (auto f = body.find("frame"); f != body.end() && !f->is_null()) frame = frame_from_json(*f, "/frame");
      const auto result = manager.post_turn(req.matches[1], it->get<std::string>(), frame);
      reply(res, 200, turn_to_json(result, manager.rulebook()));
    });

    server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, manager.session_json(req.matches[1]));
    });

    server.Get(R"(/api/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto sub = manager.subscribe(id);
      res.set_header("Cache-Control", "no-cache");
      auto last_write = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub, last_write](std::size_t, httplib::DataSink& sink) {
            if (stopping) {
              sink.done();
              return true;
            }
            auto m = sub->pop(std::chrono::milliseconds(200));
            std::string chunk;
            if (m) {
              chunk = "event: " + std::string(to_string(m->kind)) + "\ndata: " + m->to_json().dump() + "\n\n";
            } else if (sub->closed()) {
              sink.done();
              return true;
            } else if (std::chrono::steady_clock::now() - *last_write > std::chrono::seconds(5)) {
              chunk = ": ping\n\n";
            } else {
              return true;
            }
            *last_write = std::chrono::steady_clock::now();
            return sink.write(chunk.data(), chunk.size());
          },
          [this, id, sub](bool) { manager.unsubscribe(id, sub); });
    });

    server.Get("/api/model", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, manager.model_json());
    });

    server.Post("/api/model", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto it = body.find("path");
      if (it == body.end() || !it->is_string()) throw Error(ErrorCode::SchemaError, "body needs a string 'path'");
      manager.load_model(it->get<std::string>());
      reply(res, 200, manager.model_json());
    });
  }
};

HttpServer::HttpServer(SessionManager& manager, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(manager)) {
  impl_->routes();
  if (static_dir && !impl_->server.set_mount_point("/", static_dir->string())) {
    throw Error(ErrorCode::Io, "cannot serve static files from " + static_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace etadm
