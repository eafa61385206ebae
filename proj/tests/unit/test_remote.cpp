#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"
#include "paraprobe/prompts/conference.hpp"
#include "paraprobe/providers/remote.hpp"

using namespace paraprobe;
using namespace paraprobe::providers;
using nlohmann::json;

namespace {

// In-process server on an ephemeral port, stopped on destruction.
class TestServer {
 public:
  TestServer() = default;
  TestServer(const TestServer&) = delete;
  TestServer& operator=(const TestServer&) = delete;
  ~TestServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }
  void start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  Endpoint endpoint(const std::string& path = "/v1/chat") const {
    Endpoint e;
    e.base_url = "http://127.0.0.1:" + std::to_string(port_);
    e.path = path;
    e.timeout = std::chrono::milliseconds(2000);
    return e;
  }
  httplib::Server server;

 private:
  int port_ = 0;
  std::thread thread_;
};

struct Recorded {
  std::mutex mu;
  std::vector<json> bodies;
  std::vector<std::string> auth;
  void add(const httplib::Request& req) {
    std::lock_guard lock(mu);
    bodies.push_back(json::parse(req.body));
    auth.push_back(req.get_header_value("Authorization"));
  }
};

}  // namespace

TEST_CASE("base64 round trip") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  std::string bytes;
  for (int i = 0; i < 256; ++i) bytes += static_cast<char>(i);
  CHECK(base64_decode(base64_encode(bytes)) == bytes);
  CHECK_THROWS_AS(base64_decode("a*b"), Error);
}

TEST_CASE("remote generator follows the chat contract") {
  TestServer ts;
  Recorded rec;
  ts.server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    rec.add(req);
    res.set_content(json{{"text", "  paraphrase " + std::to_string(rec.bodies.size()) + "\n"}}.dump(),
                    "application/json");
  });
  ts.start();
  ::setenv("PARAPROBE_TEST_KEY", "sekret", 1);
  auto e = ts.endpoint();
  e.api_key_env = "PARAPROBE_TEST_KEY";
  const RemoteGenerator gen(e, ChatModel{"gen-model", 512, 0.7, true});
  const auto out = gen.generate("PROMPT", 3, 99);
  CHECK(out == std::vector<std::string>{"paraphrase 1", "paraphrase 2", "paraphrase 3"});
  REQUIRE(rec.bodies.size() == 3);
  const auto& b = rec.bodies[0];
  CHECK(b["model"] == "gen-model");
  CHECK(b["prompt"] == "PROMPT");
  CHECK(b["max_tokens"] == 512);
  CHECK(b["temperature"] == doctest::Approx(0.7));
  CHECK(b.contains("seed"));
  CHECK(rec.bodies[1]["seed"] != rec.bodies[0]["seed"]);
  CHECK(rec.auth[0] == "Bearer sekret");
  ::unsetenv("PARAPROBE_TEST_KEY");
}

TEST_CASE("remote reviewer appends the document or attaches the artifact") {
  TestServer ts;
  Recorded rec;
  ts.server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    rec.add(req);
    res.set_content(json{{"text", "Review."}}.dump(), "application/json");
  });
  ts.start();
  ChatModel m{"rev", 100, 1.0, false};
  const RemoteReviewer r(ts.endpoint(), m);
  ReviewRequest req;
  req.reviewer_prompt = "PROMPT";
  req.document_text = "DOC";
  CHECK(r.complete(req) == "Review.");
  const auto path = (std::filesystem::temp_directory_path() / "paraprobe-remote-artifact.bin").string();
  write_file(path, "PDFBYTES");
  req.attachment_path = path;
  r.complete(req);
  REQUIRE(rec.bodies.size() == 2);
  CHECK(rec.bodies[0]["prompt"] == "PROMPT\n\nDOC");
  CHECK_FALSE(rec.bodies[0].contains("seed"));
  CHECK(rec.bodies[1]["prompt"] == "PROMPT");
  CHECK(base64_decode(rec.bodies[1]["attachment"].get<std::string>()) == "PDFBYTES");
  CHECK(rec.auth[0].empty());
}

TEST_CASE("http failures map to provider error kinds") {
  TestServer ts;
  ts.server.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  ts.server.Post("/notjson", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  ts.server.Post("/notext", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"other":1})", "application/json");
  });
  ts.start();
  const auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;  // sentinel: no error raised
  };
  CHECK(kind_of([&] { post_json(ts.endpoint("/fail"), json::object()); }) == ErrorKind::kProviderMalformedOutput);
  CHECK(kind_of([&] { post_json(ts.endpoint("/notjson"), json::object()); }) == ErrorKind::kProviderMalformedOutput);
  CHECK(kind_of([&] { RemoteGenerator(ts.endpoint("/notext"), {}).generate("p", 1, 1); }) ==
        ErrorKind::kProviderMalformedOutput);

  Endpoint dead;
  dead.base_url = "http://127.0.0.1:1";
  dead.path = "/x";
  dead.timeout = std::chrono::milliseconds(500);
  CHECK(kind_of([&] { post_json(dead, json::object()); }) == ErrorKind::kProviderTimeout);
}

TEST_CASE("endpoint config refuses inline keys") {
  CHECK_THROWS_AS(endpoint_from_json(json{{"base_url", "http://x"}, {"api_key", "k"}}, "/p"), Error);
  CHECK_THROWS_AS(endpoint_from_json(json::object(), "/p"), Error);
  const auto e = endpoint_from_json(json{{"base_url", "http://x"}, {"api_key_env", "K"}, {"timeout_ms", 5}}, "/p");
  CHECK(e.path == "/p");
  CHECK(e.api_key_env == "K");
  CHECK(e.timeout.count() == 5);
}

TEST_CASE("sidecar client splits batches and keeps order") {
  TestServer ts;
  Recorded rec;
  ts.server.Get("/v1/limits", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"max_batch":2,"max_text_bytes":1000})", "application/json");
  });
  ts.server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok","models":["e5","gpt2"]})", "application/json");
  });
  ts.server.Post("/v1/perplexity", [&](const httplib::Request& req, httplib::Response& res) {
    rec.add(req);
    json values = json::array();
    const auto body = json::parse(req.body);
    for (const auto& t : body["texts"]) values.push_back(static_cast<double>(t.get<std::string>().size()));
    res.set_content(json{{"values", values}, {"model_id", "gpt2"}}.dump(), "application/json");
  });
  ts.server.Post("/v1/similarity", [&](const httplib::Request& req, httplib::Response& res) {
    json values = json::array();
    const auto body = json::parse(req.body);
    for (const auto& p : body["pairs"]) values.push_back(p[0] == p[1] ? 1.0 : 0.5);
    res.set_content(json{{"values", values}, {"model_id", "e5"}}.dump(), "application/json");
  });
  ts.server.Post("/v1/sentiment", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"values":[0.1, 0.2]})", "application/json");
  });
  ts.start();
  const auto client = std::make_shared<SidecarClient>(ts.endpoint(""));
  CHECK(client->health().status == "ok");
  CHECK(client->health().models.size() == 2);
  CHECK(client->limits().max_batch == 2);
  const auto v = client->perplexity({"a", "bb", "ccc", "dddd", "eeeee"});
  CHECK(v == std::vector<double>{1, 2, 3, 4, 5});
  REQUIRE(rec.bodies.size() == 3);
  CHECK(rec.bodies[0]["texts"].size() == 2);
  CHECK(rec.bodies[2]["texts"].size() == 1);
  CHECK(client->last_model_id() == "gpt2");

  CHECK(SidecarSimilarity(client).similarity("x", "x") == 1.0);
  CHECK(SidecarSimilarity(client).similarity("x", "y") == 0.5);
  CHECK(SidecarPerplexity(client).perplexity("abc") == 3.0);
  CHECK_THROWS_AS(client->perplexity({""}), Error);
  // one text in, two values back
  try {
    SidecarSentiment(client).sentiment("hi");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kProviderMalformedOutput);
  }
}

TEST_CASE("retries cover transient remote failures") {
  TestServer ts;
  std::mutex mu;
  int calls = 0;
  const auto& conf = prompts::find_conference("acl");
  const auto& tmpl = prompts::builtin_template(prompts::TemplateId::kDelimiters);
  ts.server.Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu);
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(json{{"text", "Fine.\n" + tmpl.score_marker + "\n4"}}.dump(), "application/json");
  });
  ts.start();
  const RemoteReviewer r(ts.endpoint(), {});
  const auto prompt = prompts::build_reviewer_prompt(conf, tmpl);
  ReviewRequest req;
  req.reviewer_prompt = prompt;
  req.document_text = "doc";
  RetryPolicy retry;
  retry.retries = 3;
  CHECK(review(r, req, tmpl, conf.scale, retry).score == Rational(4));
  CHECK(calls == 3);
}
