#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "essaymark/model_client.hpp"

using namespace essaymark;
using nlohmann::json;

namespace {

// In-process stub: echoes one span over the first word and upcases "fixme".
class StubServer {
 public:
  StubServer() {
    server_.Post("/v1/annotate", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      ++annotate_hits;
      auto body = json::parse(req.body);
      const std::string text = body["text"];
      json spans = json::array();
      if (!text.empty()) {
        auto end = text.find(' ');
        if (end == std::string::npos) end = text.size();
        spans.push_back({{"start", 0},
                         {"end", end},
                         {"label", "Lead"},
                         {"confidence", 0.9}});
      }
      res.set_content(json{{"spans", spans}}.dump(), "application/json");
    });
    server_.Post("/v1/correct", [this](const httplib::Request& req,
                                       httplib::Response& res) {
      ++correct_hits;
      auto body = json::parse(req.body);
      json out = json::array();
      for (const auto& s : body["sentences"]) {
        std::string t = s;
        auto pos = t.find("fixme");
        if (pos != std::string::npos) t.replace(pos, 5, "FIXED");
        out.push_back(t);
      }
      res.set_content(json{{"corrected", out}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  std::atomic<int> annotate_hits{0};
  std::atomic<int> correct_hits{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
    std::remove(path.c_str());
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("request hash is canonical over key order") {
  json a = {{"essay_id", "e1"}, {"text", "hello"}};
  json b = {{"text", "hello"}, {"essay_id", "e1"}};
  json c = {{"essay_id", "e2"}, {"text", "hello"}};
  CHECK(FixtureStore::request_hash(a) == FixtureStore::request_hash(b));
  CHECK(FixtureStore::request_hash(a) != FixtureStore::request_hash(c));
  CHECK(FixtureStore::request_hash(a).size() == 16);  // 64-bit hex
}

TEST_CASE("fixture store round-trips through disk deterministically") {
  TempFile f("essaymark_fixture_test.jsonl");
  FixtureStore store;
  store.put("aaaa", json{{"x", 1}});
  store.put("bbbb", json{{"y", 2}});
  store.save(f.path);
  auto loaded = FixtureStore::open(f.path);
  CHECK(loaded.size() == 2);
  CHECK(loaded.lookup("aaaa") == json{{"x", 1}});
  CHECK(!loaded.lookup("cccc").has_value());

  // byte-identical on re-save
  loaded.save(f.path + ".2");
  std::ifstream i1(f.path), i2(f.path + ".2");
  std::stringstream s1, s2;
  s1 << i1.rdbuf();
  s2 << i2.rdbuf();
  CHECK(s1.str() == s2.str());
  std::remove((f.path + ".2").c_str());
}

TEST_CASE("missing fixture file opens empty") {
  CHECK(FixtureStore::open("/nonexistent/fixtures.jsonl").size() == 0);
}

TEST_CASE("live annotate parses spans and preserves order") {
  StubServer stub;
  ClientConfig cfg;
  cfg.endpoint = stub.endpoint();
  AnnotatorClient client(cfg);
  auto out = client.annotate({{"e1", "hello world"}, {"e2", "solo"}});
  REQUIRE(out.size() == 2);
  CHECK(!out[0].error);
  REQUIRE(out[0].spans.size() == 1);
  CHECK(out[0].spans[0] == ComponentSpan{"e1", 0, 5, ComponentLabel::Lead});
  CHECK(out[1].spans[0].end == 4);
}

TEST_CASE("concurrent batch keeps input order") {
  StubServer stub;
  ClientConfig cfg;
  cfg.endpoint = stub.endpoint();
  cfg.policy.concurrency = 8;
  AnnotatorClient client(cfg);
  std::vector<std::pair<std::string, std::string>> essays;
  for (int i = 0; i < 40; ++i)
    essays.push_back({"e" + std::to_string(i),
                      "word" + std::to_string(i) + " tail text"});
  auto out = client.annotate(essays);
  REQUIRE(out.size() == 40);
  for (int i = 0; i < 40; ++i) {
    REQUIRE(out[i].spans.size() == 1);
    CHECK(out[i].spans[0].essay_id == "e" + std::to_string(i));
    CHECK(out[i].spans[0].end == ("word" + std::to_string(i)).size());
  }
  CHECK(stub.annotate_hits == 40);
}

TEST_CASE("record then replay: identical results, no network") {
  TempFile f("essaymark_record_test.jsonl");
  std::vector<std::pair<std::string, std::string>> essays = {
      {"e1", "alpha beta"}, {"e2", "gamma delta"}};
  std::vector<AnnotateOutcome> live;
  {
    StubServer stub;
    ClientConfig cfg;
    cfg.endpoint = stub.endpoint();
    cfg.mode = ClientMode::Record;
    cfg.fixture_path = f.path;
    AnnotatorClient client(cfg);
    live = client.annotate(essays);
    client.save_fixtures();
    CHECK(stub.annotate_hits == 2);
  }
  // server gone; replay must serve from the fixture file
  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";  // unroutable on purpose
  cfg.mode = ClientMode::Replay;
  cfg.fixture_path = f.path;
  AnnotatorClient client(cfg);
  auto replayed = client.annotate(essays);
  REQUIRE(replayed.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(!replayed[i].error);
    CHECK(replayed[i].spans == live[i].spans);
  }
}

TEST_CASE("replay miss is an error, not a network call") {
  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.mode = ClientMode::Replay;
  cfg.fixture_path = "/nonexistent/fixtures.jsonl";
  AnnotatorClient client(cfg);
  auto out = client.annotate({{"e1", "text"}});
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].error.has_value());
  CHECK(out[0].error->find("FixtureMiss") != std::string::npos);
}

TEST_CASE("connection failure surfaces per essay after retries") {
  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.policy.timeout_ms = 300;
  cfg.policy.retries = 1;
  AnnotatorClient client(cfg);
  auto out = client.annotate({{"e1", "text"}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].error.has_value());
  CHECK(out[0].spans.empty());
}

TEST_CASE("schema violations are rejected") {
  httplib::Server bad;
  bad.Post("/v1/annotate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"spans": [{"start": 0, "end": 4, "label": "Bogus"}]})",
                    "application/json");
  });
  int port = bad.bind_to_any_port("127.0.0.1");
  std::thread t([&] { bad.listen_after_bind(); });
  bad.wait_until_ready();

  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
  AnnotatorClient client(cfg);
  auto out = client.annotate({{"e1", "some text"}});
  REQUIRE(out[0].error.has_value());
  CHECK(out[0].error->find("SchemaViolation") != std::string::npos);

  bad.stop();
  t.join();
}

TEST_CASE("out-of-bounds predicted spans are clipped with a warning") {
  httplib::Server srv;
  srv.Post("/v1/annotate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"spans": [{"start": 2, "end": 999, "label": "Claim"}]})",
                    "application/json");
  });
  int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
  AnnotatorClient client(cfg);
  auto out = client.annotate({{"e1", "short text"}});  // 10 scalars
  REQUIRE(out[0].spans.size() == 1);
  CHECK(out[0].spans[0].end == 10);
  CHECK(!out[0].warnings.empty());
  CHECK(!out[0].error);

  srv.stop();
  t.join();
}

TEST_CASE("corrector round-trip and batch fallback") {
  StubServer stub;
  ClientConfig cfg;
  cfg.endpoint = stub.endpoint();
  CorrectorClient client(cfg);
  auto out = client.correct({"please fixme now", "fine already"});
  REQUIRE(!out.error);
  REQUIRE(out.corrected.size() == 2);
  CHECK(out.corrected[0] == "please FIXED now");
  CHECK(out.corrected[1] == "fine already");

  // batching preserves order and count
  std::vector<std::string> sentences;
  for (int i = 0; i < 10; ++i) sentences.push_back("s" + std::to_string(i));
  std::vector<std::string> errors;
  auto all = client.correct_all(sentences, 3, &errors);
  CHECK(all == sentences);
  CHECK(errors.empty());
}

TEST_CASE("failed correction batches fall back to identity") {
  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.policy.timeout_ms = 300;
  cfg.policy.retries = 0;
  CorrectorClient client(cfg);
  std::vector<std::string> sentences = {"one", "two", "three"};
  std::vector<std::string> errors;
  auto out = client.correct_all(sentences, 2, &errors);
  CHECK(out == sentences);
  CHECK(errors.size() == 2);  // two batches, both failed
}
