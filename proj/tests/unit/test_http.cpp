#include <gtest/gtest.h>

#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include "../support/fixtures.hpp"
#include "../support/sse.hpp"
#include "etadm/error.hpp"
#include "etadm/http_server.hpp"
#include "etadm/service.hpp"

#include "httplib.h"
#include "json.hpp"

using namespace etadm;
using nlohmann::json;

namespace {

class Server {
 public:
  explicit Server(std::shared_ptr<const ModelParams> model = nullptr)
      : mgr(fixtures::rulebook(), fixtures::db(), std::move(model)), http(mgr) {
    port = http.bind_any_port("127.0.0.1");
    thread = std::thread([this] { http.listen_after_bind(); });
    for (int i = 0; i < 200 && !http.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~Server() {
    http.stop();
    thread.join();
  }
  httplib::Client client() const { return sse::client(port); }

  SessionManager mgr;
  HttpServer http;
  int port = -1;
  std::thread thread;
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
  const auto res = c.Post(path, body.dump(), "application/json");
  EXPECT_TRUE(res);
  if (!res) return {};
  EXPECT_EQ(res->status, expect) << res->body;
  return json::parse(res->body);
}

std::shared_ptr<const ModelParams> stop_model() {
  auto p = ModelParams::zeros({768, 64, 4, 13});
  p.b_pred[12] = 5.0;
  return std::make_shared<const ModelParams>(p);
}

}  // namespace

TEST(Http, StatusMapping) {
  EXPECT_EQ(http_status_for(ErrorCode::UnknownSession), 404);
  EXPECT_EQ(http_status_for(ErrorCode::Busy), 409);
  EXPECT_EQ(http_status_for(ErrorCode::ModelMissing), 409);
  EXPECT_EQ(http_status_for(ErrorCode::SchemaError), 400);
  EXPECT_EQ(http_status_for(ErrorCode::InvalidArgument), 400);
  EXPECT_EQ(http_status_for(ErrorCode::QueueNotEmpty), 500);
  const auto j = error_json(Error(ErrorCode::Busy, "later"));
  EXPECT_EQ(j["error"], "Busy");
  EXPECT_EQ(j["message"], "later");
}

TEST(Http, GoldenTranscriptOverTheWire) {
  std::ifstream in(std::string(ETADM_GOLDEN_DIR) + "/service_transcript.json");
  const auto g = json::parse(in);
  Server srv;
  ASSERT_GT(srv.port, 0);
  auto c = srv.client();
  const auto created = post(c, "/api/sessions", {{"policy", "rules"}}, 201);
  EXPECT_EQ(created["response"], g["opening"]["response"]);
  EXPECT_EQ(created["turn"]["winner_names"], g["opening"]["winner_names"]);
  const std::string id = created["id"];
  for (const auto& step : g["turns"]) {
    const auto turn = post(c, "/api/sessions/" + id + "/turns", {{"utterance", step["utterance"]}}, 200);
    EXPECT_EQ(turn["winner_names"], step["winner_names"]);
    EXPECT_EQ(turn["response"], step["response"]);
    EXPECT_EQ(turn["traces"].size(), step["winner_names"].size());
  }
  const auto view = c.Get("/api/sessions/" + id);
  ASSERT_TRUE(view);
  EXPECT_EQ(view->status, 200);
  EXPECT_EQ(json::parse(view->body)["turns"].size(), g["turns"].size() + 1);
  EXPECT_EQ(view->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST(Http, ErrorsAsJson) {
  Server srv;
  auto c = srv.client();
  EXPECT_EQ(post(c, "/api/sessions", {{"policy", "model"}}, 409)["error"], "ModelMissing");
  EXPECT_EQ(post(c, "/api/sessions", {{"policy", "psychic"}}, 400)["error"], "InvalidArgument");
  EXPECT_EQ(post(c, "/api/sessions/nope/turns", {{"utterance", "hi"}}, 404)["error"], "UnknownSession");
  const std::string id = post(c, "/api/sessions", json::object(), 201)["id"];
  EXPECT_EQ(post(c, "/api/sessions/" + id + "/turns", {{"text", "hi"}}, 400)["error"], "SchemaError");
  EXPECT_EQ(post(c, "/api/sessions/" + id + "/turns", {{"utterance", "x"}, {"frame", {{"intent", 3}}}}, 400)["error"],
            "SchemaError");
  const auto bad = c.Post("/api/sessions", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(c.Get("/api/sessions/nope")->status, 404);
  EXPECT_EQ(c.Get("/api/sessions/nope/stream")->status, 404);
  EXPECT_EQ(c.Options("/api/sessions")->status, 204);
  EXPECT_EQ(post(c, "/api/model", {{"path", "/nonexistent.json"}}, 400)["error"], "Io");
  EXPECT_EQ(json::parse(c.Get("/api/model")->body)["loaded"], false);
}

TEST(Http, ExplicitFrameOverridesExtractor) {
  Server srv;
  auto c = srv.client();
  const std::string id = post(c, "/api/sessions", json::object(), 201)["id"];
  const json frame = {{"intent", "inform"}, {"informed", {{"food", "thai"}}}, {"requested", json::array()}};
  const auto turn = post(c, "/api/sessions/" + id + "/turns", {{"utterance", "zzz"}, {"frame", frame}}, 200);
  EXPECT_EQ(turn["winner_names"], json::array({"RequestArea"}));
}

TEST(Http, SseRulesStream) {
  Server srv;
  auto c = srv.client();
  const std::string id = post(c, "/api/sessions", json::object(), 201)["id"];
  sse::StreamReader reader(srv.port, id, 2);
  ASSERT_EQ(reader.wait_connected(), 200);
  const auto t1 = post(c, "/api/sessions/" + id + "/turns", {{"utterance", "cheap italian in the centre"}}, 200);
  const auto t2 = post(c, "/api/sessions/" + id + "/turns", {{"utterance", "what is the address"}}, 200);
  const auto events = reader.wait_done();
  EXPECT_FALSE(reader.malformed());
  const std::size_t n1 = t1["winner_sequence"].size(), n2 = t2["winner_sequence"].size();
  ASSERT_EQ(events.size(), (1 + n1 + 1) + (1 + n2 + 1));
  EXPECT_EQ(events[0].first, "frame");
  EXPECT_EQ(events[1 + n1].first, "turn_done");
  EXPECT_EQ(events[0].second["session_id"], id);
  EXPECT_EQ(events[1].second["payload"], t1["traces"][0]);
  EXPECT_EQ(events[1 + n1].second["payload"]["winner_names"], t1["winner_names"]);
}

TEST(Http, SseModelStreamHasStopTrace) {
  Server srv(stop_model());
  auto c = srv.client();
  const std::string id = post(c, "/api/sessions", {{"policy", "model"}}, 201)["id"];
  sse::StreamReader reader(srv.port, id, 1);
  ASSERT_EQ(reader.wait_connected(), 200);
  const auto t = post(c, "/api/sessions/" + id + "/turns", {{"utterance", "hello"}}, 200);
  const auto events = reader.wait_done();
  EXPECT_FALSE(reader.malformed());
  ASSERT_EQ(events.size(), 1 + (t["winner_sequence"].size() + 1) + 1);
  EXPECT_EQ(events[1].second["payload"]["chosen_action_name"], "STOP");
}

TEST(Http, TwoStreamsSeeTheSameEvents) {
  Server srv;
  auto c = srv.client();
  const std::string id = post(c, "/api/sessions", json::object(), 201)["id"];
  sse::StreamReader a(srv.port, id, 1), b(srv.port, id, 1);
  ASSERT_EQ(a.wait_connected(), 200);
  ASSERT_EQ(b.wait_connected(), 200);
  post(c, "/api/sessions/" + id + "/turns", {{"utterance", "cheap italian in the centre"}}, 200);
  EXPECT_EQ(a.wait_done(), b.wait_done());
}
