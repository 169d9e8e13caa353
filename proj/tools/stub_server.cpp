// Reference stub for the two inference endpoints. Annotation answers with
// the gold spans of the loaded corpus; correction fixes a small table of
// known misspellings. Meant for tests and fixture recording, not for use as
// a model.

#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "essaymark/corpus.hpp"
#include "essaymark/edits.hpp"

using namespace essaymark;
using nlohmann::json;

namespace {

const std::map<std::string, std::string>& correction_table() {
  static const std::map<std::string, std::string> table = {
      {"advanteges", "advantages"},   {"disadvanteges", "disadvantages"},
      {"noice", "noise"},             {"becuase", "because"},
      {"definately", "definitely"},   {"card", "car"},
  };
  return table;
}

std::string correct_sentence(const std::string& sentence) {
  const auto tokens = tokenize(sentence);
  std::string out = sentence;
  // replace right-to-left so earlier offsets stay valid (ASCII corpus)
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    auto fix = correction_table().find(it->text);
    if (fix == correction_table().end()) continue;
    out.replace(it->start, it->end - it->start, fix->second);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"essaymark stub inference server"};
  std::string corpus_path;
  std::string host = "127.0.0.1";
  int port = 0;  // 0 = pick a free port
  app.add_option("--corpus", corpus_path, "corpus CSV serving gold spans")
      ->required();
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "port (0 picks a free one)");
  CLI11_PARSE(app, argc, argv);

  Corpus corpus;
  try {
    corpus = load_corpus(corpus_path, ColumnMapping{});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  httplib::Server server;

  server.Post("/v1/annotate", [&](const httplib::Request& req,
                                  httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("essay_id")) {
      res.status = 400;
      return;
    }
    const std::string id = body["essay_id"].get<std::string>();
    json spans = json::array();
    auto it = corpus.gold_spans.find(id);
    if (it != corpus.gold_spans.end()) {
      for (const auto& s : it->second)
        spans.push_back({{"start", s.start},
                         {"end", s.end},
                         {"label", std::string(to_string(s.label))},
                         {"confidence", 1.0}});
    }
    res.set_content(json{{"spans", spans}}.dump(), "application/json");
  });

  server.Post("/v1/correct", [&](const httplib::Request& req,
                                 httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("sentences") ||
        !body["sentences"].is_array()) {
      res.status = 400;
      return;
    }
    json corrected = json::array();
    for (const auto& s : body["sentences"])
      corrected.push_back(correct_sentence(s.get<std::string>()));
    res.set_content(json{{"corrected", corrected}}.dump(), "application/json");
  });

  if (port == 0) {
    port = server.bind_to_any_port(host);
    if (port < 0) {
      std::cerr << "error: cannot bind\n";
      return 1;
    }
    std::cout << "listening on " << host << ":" << port << std::endl;
    return server.listen_after_bind() ? 0 : 1;
  }
  std::cout << "listening on " << host << ":" << port << std::endl;
  return server.listen(host, port) ? 0 : 1;
}
