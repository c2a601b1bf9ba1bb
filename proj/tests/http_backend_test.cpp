// Contract tests for the HTTP generator and embedder against a local fake
// model server.

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "statefulrec/embedding.hpp"
#include "statefulrec/error.hpp"
#include "statefulrec/generation.hpp"

using namespace statefulrec;

namespace {

class FakeServer {
 public:
  FakeServer() {
    server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = peak_.load();
      while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
      }
      {
        std::lock_guard lock(mutex_);
        last_auth_ = req.get_header_value("Authorization");
        last_body_ = req.body;
        last_content_type_ = req.get_header_value("Content-Type");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
      --in_flight_;
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt = body.at("prompt");
      if (prompt.find("FAIL500") != std::string::npos) {
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      }
      if (prompt.find("GARBAGE") != std::string::npos) {
        res.set_content("{not json", "application/json");
        return;
      }
      if (prompt.find("NOTEXT") != std::string::npos) {
        res.set_content(R"({"answer":"x"})", "application/json");
        return;
      }
      res.set_content(nlohmann::json{{"text", "model says " + std::to_string(prompt.size())}}.dump(),
                      "application/json");
    });
    server_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      const std::string text = body.at("text");
      const std::size_t n = text == "short" ? 3 : 4;
      std::vector<double> values(n, 0.0);
      values[text.size() % n] = 2.0;
      res.set_content(nlohmann::json{{"values", values}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int peak() const { return peak_.load(); }
  void set_delay(int ms) { delay_ms_ = ms; }
  std::string last_auth() {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }
  std::string last_body() {
    std::lock_guard lock(mutex_);
    return last_body_;
  }
  std::string last_content_type() {
    std::lock_guard lock(mutex_);
    return last_content_type_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::atomic<int> delay_ms_{0};
  std::mutex mutex_;
  std::string last_auth_;
  std::string last_body_;
  std::string last_content_type_;
};

ConditionedPrompt prompt(const std::string& q) {
  return compose_prompt(Condition::kContextual, q, std::nullopt, std::nullopt);
}

int status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBackend);
    return e.status();
  }
  ADD_FAILURE() << "expected a backend error";
  return -1;
}

}  // namespace

TEST(HttpGenerator, PostsPromptAndReadsText) {
  FakeServer server;
  ::unsetenv(kApiTokenEnv);
  const HttpGenerator gen(server.url("/generate"), 5000);
  const auto p = prompt("why recursion");
  const auto text = gen.complete(p);
  EXPECT_EQ(text, "model says " + std::to_string(p.rendered.size()));
  const auto body = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(body, nlohmann::json({{"prompt", p.rendered}}));
  EXPECT_EQ(server.last_content_type(), "application/json");
  EXPECT_EQ(server.last_auth(), "");
}

TEST(HttpGenerator, SendsBearerTokenFromEnvironment) {
  FakeServer server;
  ::setenv(kApiTokenEnv, "sekret", 1);
  const HttpGenerator gen(server.url("/generate"), 5000);
  ::unsetenv(kApiTokenEnv);
  gen.complete(prompt("hello"));
  EXPECT_EQ(server.last_auth(), "Bearer sekret");
}

TEST(HttpGenerator, NonSuccessStatus) {
  FakeServer server;
  const HttpGenerator gen(server.url("/generate"), 5000);
  EXPECT_EQ(status_of([&] { gen.complete(prompt("FAIL500")); }), 500);
  const HttpGenerator missing(server.url("/nowhere"), 5000);
  EXPECT_EQ(status_of([&] { missing.complete(prompt("x")); }), 404);
}

TEST(HttpGenerator, MalformedBody) {
  FakeServer server;
  const HttpGenerator gen(server.url("/generate"), 5000);
  EXPECT_EQ(status_of([&] { gen.complete(prompt("GARBAGE")); }), 200);
  EXPECT_EQ(status_of([&] { gen.complete(prompt("NOTEXT")); }), 200);
}

TEST(HttpGenerator, Timeout) {
  FakeServer server;
  server.set_delay(600);
  const HttpGenerator gen(server.url("/generate"), 100);
  EXPECT_EQ(status_of([&] { gen.complete(prompt("slow")); }), 0);
}

TEST(HttpGenerator, ConnectionRefused) {
  int port = 0;
  {
    FakeServer server;
    const auto url = server.url("");
    port = std::stoi(url.substr(url.rfind(':') + 1));
  }
  const HttpGenerator gen("http://127.0.0.1:" + std::to_string(port) + "/generate", 500);
  EXPECT_EQ(status_of([&] { gen.complete(prompt("x")); }), 0);
}

TEST(HttpGenerator, RejectsNonHttpEndpoint) {
  try {
    HttpGenerator gen("https://example.invalid/generate", 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidConfiguration);
  }
}

TEST(HttpGenerator, BatchBoundsInFlightRequests) {
  FakeServer server;
  server.set_delay(20);
  GeneratorConfig config;
  config.backend = BackendKind::kHttp;
  config.endpoint = server.url("/generate");
  config.timeout_ms = 5000;
  const auto gen = make_generator(config);
  std::vector<GenerationRequest> requests;
  for (int i = 0; i < 24; ++i) {
    requests.push_back({prompt("question number " + std::to_string(i)), "q" + std::to_string(i),
                        std::nullopt});
  }
  const auto out = generate_batch(requests, *gen, 3);
  ASSERT_EQ(out.size(), requests.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].question_id, requests[i].question_id);
    EXPECT_EQ(out[i].text,
              "model says " + std::to_string(requests[i].prompt.rendered.size()));
    EXPECT_EQ(out[i].backend_name, "http");
  }
  EXPECT_LE(server.peak(), 3);
  EXPECT_GE(server.peak(), 2);
}

TEST(HttpGenerator, BatchFailureCarriesStatus) {
  FakeServer server;
  GeneratorConfig config;
  config.backend = BackendKind::kHttp;
  config.endpoint = server.url("/generate");
  const auto gen = make_generator(config);
  std::vector<GenerationRequest> requests = {
      {prompt("fine"), "q0", std::nullopt},
      {prompt("FAIL500"), "q1", std::nullopt},
      {prompt("also fine"), "q2", std::nullopt},
  };
  try {
    generate_batch(requests, *gen, 2);
    FAIL();
  } catch (const BatchError& e) {
    ASSERT_EQ(e.failures().size(), 1u);
    EXPECT_EQ(e.failures()[0].index, 1u);
    EXPECT_EQ(e.failures()[0].status, 500);
    EXPECT_EQ(e.status(), 500);
    EXPECT_TRUE(e.results()[0].has_value());
    EXPECT_TRUE(e.results()[2].has_value());
  }
}

TEST(HttpEmbedder, ReadsValuesAndChecksDimension) {
  FakeServer server;
  const HttpEmbedder embedder(server.url("/embed"), 4, 5000);
  const auto v = embedder.embed("abcd");
  ASSERT_EQ(v.dimension(), 4u);
  EXPECT_EQ(v[0], 2.0);
  EXPECT_EQ(status_of([&] { embedder.embed("short"); }), 200);
}
