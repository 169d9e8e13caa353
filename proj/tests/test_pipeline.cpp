#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "essaymark/json_schema.hpp"
#include "essaymark/pipeline.hpp"

using namespace essaymark;
using nlohmann::json;
namespace fs = std::filesystem;

#ifndef ESSAYMARK_DATA_DIR
#error "ESSAYMARK_DATA_DIR must be defined by the build"
#endif

namespace {

const fs::path kDataDir = ESSAYMARK_DATA_DIR;

json load_schema(const std::string& name) {
  std::ifstream in(kDataDir / "schemas" / name);
  REQUIRE(in.good());
  return json::parse(in);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("essaymark_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

Corpus tiny_corpus() {
  std::vector<csv::Row> rows = {
      {"essay_id", "full_text", "discourse_type", "discourse_start",
       "discourse_end", "holistic_essay_score"},
      {"e1", "Cars are fast. They have advanteges.", "Position", "0", "14",
       "4"},
      {"e1", "Cars are fast. They have advanteges.", "Claim", "15", "36", "4"},
      {"e2", "Noise is a problem.", "Lead", "0", "19", "3"},
  };
  return load_corpus_rows(rows, ColumnMapping{}, nullptr);
}

}  // namespace

TEST_CASE("config file parsing with CLI precedence") {
  TempDir tmp;
  auto cfg_path = tmp.path / "run.cfg";
  std::ofstream(cfg_path) << "# comment\n"
                             "[run]\n"
                             "corpus = data/x.csv\n"
                             "output_dir = \"my out\"\n"
                             "jobs = 4\n"
                             "char_overlap = true\n"
                             "column.id = eid\n";
  auto cfg = RunConfig::from_file(cfg_path.string());
  CHECK(cfg.corpus_path == "data/x.csv");
  CHECK(cfg.output_dir == "my out");
  CHECK(cfg.jobs == 4);
  CHECK(cfg.char_overlap);
  CHECK(cfg.schema.id == "eid");
  // later apply() wins, as for CLI overrides
  cfg.apply("jobs", "2");
  CHECK(cfg.jobs == 2);
  CHECK_THROWS_AS(cfg.apply("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply("jobs", "many"), ConfigError);
}

TEST_CASE("predictions jsonl round-trip") {
  TempDir tmp;
  auto path = (tmp.path / "pred.jsonl").string();
  std::map<std::string, std::vector<ComponentSpan>> preds = {
      {"e1",
       {{"e1", 0, 14, ComponentLabel::Position},
        {"e1", 15, 36, ComponentLabel::Claim}}},
      {"e2", {{"e2", 0, 19, ComponentLabel::Lead}}},
  };
  write_predictions_jsonl(path, preds);
  CHECK(load_predictions_jsonl(path) == preds);
}

TEST_CASE("error spans jsonl round-trip") {
  TempDir tmp;
  auto path = (tmp.path / "err.jsonl").string();
  std::vector<ErrorSpan> spans = {{"e1", 25, 35, ErrorLabel::Spelling},
                                  {"e2", 4, 4, ErrorLabel::Grammar}};
  write_error_spans_jsonl(path, spans);
  auto loaded = load_error_spans_jsonl(path);
  CHECK(loaded["e1"] == std::vector<ErrorSpan>{spans[0]});
  CHECK(loaded["e2"] == std::vector<ErrorSpan>{spans[1]});
}

TEST_CASE("scores load from jsonl and csv alike") {
  TempDir tmp;
  auto jpath = (tmp.path / "s.jsonl").string();
  std::ofstream(jpath) << R"({"essay_id": "e1", "score": 4})"
                       << "\n"
                       << R"({"essay_id": "e2", "score": 3})"
                       << "\n";
  auto cpath = (tmp.path / "s.csv").string();
  std::ofstream(cpath) << "essay_id,score\ne1,4\ne2,3\n";
  auto a = load_scores(jpath);
  auto b = load_scores(cpath);
  CHECK(a == b);
  CHECK(a.at("e1") == 4);
}

TEST_CASE("eval_spans: perfect predictions give macro f1 of 1") {
  auto corpus = tiny_corpus();
  auto tally = eval_spans(corpus, corpus.gold_spans, SpanEvalOptions{});
  CHECK(macro_f1(tally) == doctest::Approx(1.0));
  auto report = span_report_json(tally);
  CHECK(json_schema::validate(report, load_schema("span_report.schema.json"))
            .empty());
  CHECK(report["per_label"].size() == 7);
}

TEST_CASE("eval_spans is independent of job count") {
  auto corpus = tiny_corpus();
  std::map<std::string, std::vector<ComponentSpan>> preds = {
      {"e1", {{"e1", 0, 13, ComponentLabel::Position}}},
      {"e2", {{"e2", 2, 19, ComponentLabel::Claim}}},
  };
  auto t1 = eval_spans(corpus, preds, SpanEvalOptions{.jobs = 1});
  auto t4 = eval_spans(corpus, preds, SpanEvalOptions{.jobs = 4});
  CHECK(span_report_json(t1) == span_report_json(t4));
}

TEST_CASE("agreement report carries rows and summary, and validates") {
  std::vector<AgreementRow> rows = {{"model_a", 0.91, 62.0, 0.05, 100},
                                    {"model_b", 0.85, 55.0, -0.10, 100}};
  auto report = agreement_report_json(rows);
  CHECK(json_schema::validate(report,
                              load_schema("agreement_report.schema.json"))
            .empty());
  CHECK(report["summary"]["qwk"]["avg"] == doctest::Approx(0.88));
  CHECK(report["summary"]["qwk"]["min"] == doctest::Approx(0.85));
  CHECK(report["summary"]["smd"]["max"] == doctest::Approx(0.05));
  auto md = agreement_report_markdown(rows);
  CHECK(md.find("model_a") != std::string::npos);
}

TEST_CASE("bias report json validates against its schema") {
  std::vector<ScoredRecord> recs;
  for (int i = 0; i < 5; ++i) {
    ScoredRecord r;
    r.y_true = 1 + i;
    r.y_pred = 1 + (i + 1) % 5;
    r.demographics.gender = Gender::Female;
    if (i % 2 == 0) r.demographics.ell = true;
    recs.push_back(r);
  }
  auto report = bias_report_json(subgroup_bias(recs));
  CHECK(json_schema::validate(report, load_schema("bias_report.schema.json"))
            .empty());
}

TEST_CASE("validation report json validates against its schema") {
  auto report = validation_to_json(validate_corpus(tiny_corpus()));
  CHECK(json_schema::validate(json::parse(report),
                              load_schema("validation_report.schema.json"))
            .empty());
}

TEST_CASE("schema validator flags bad instances") {
  auto schema = load_schema("span_report.schema.json");
  json bad = {{"macro_f1", 2.0}, {"per_label", json::array()}};
  CHECK(!json_schema::validate(bad, schema).empty());
  json missing = {{"per_label", json::array()}};
  CHECK(!json_schema::validate(missing, schema).empty());
  json extra = {{"macro_f1", 0.5}, {"per_label", json::array()}, {"x", 1}};
  CHECK(!json_schema::validate(extra, schema).empty());
}

TEST_CASE("extract_essay_edits classifies and remaps to essay offsets") {
  Essay essay;
  essay.id = "e1";
  essay.text = "Cars are fast. They have advanteges.";
  std::map<int, std::string> corrections = {
      {1, "They have advantages."}};  // sentence 1 only
  auto lex = Lexicon::from_words({"cars", "are", "fast", "they", "have",
                                  "advantages"});
  auto edits = extract_essay_edits(essay, corrections, lex);
  REQUIRE(edits.sentences.size() == 1);
  CHECK(edits.sentences[0].sentence_index == 1);
  REQUIRE(edits.spans.size() == 1);
  // "advanteges" starts at essay offset 25
  CHECK(edits.spans[0].start == 25);
  CHECK(edits.spans[0].end == 35);
  CHECK(edits.spans[0].label == ErrorLabel::Spelling);
  CHECK(edits.spans[0].essay_id == "e1");

  std::ostringstream out;
  write_edits_jsonl(out, edits);
  auto line = json::parse(out.str());
  CHECK(line["essay_id"] == "e1");
}

TEST_CASE("identity corrections produce no edits") {
  Essay essay;
  essay.id = "e1";
  essay.text = "All good here.";
  auto edits = extract_essay_edits(essay, {{0, "All good here."}},
                                   Lexicon::from_words({}));
  CHECK(edits.spans.empty());
}

TEST_CASE("build-xml writes one file per essay plus a valid manifest") {
  TempDir tmp;
  auto corpus = tiny_corpus();
  std::map<std::string, std::vector<ErrorSpan>> errors = {
      {"e1", {{"e1", 25, 35, ErrorLabel::Spelling}}}};
  auto res = run_build_xml(corpus, corpus.gold_spans, errors,
                           tmp.path.string(), XmlMode::Fragment);
  CHECK(res.files_written == 2);
  CHECK(fs::exists(tmp.path / "e1.xml"));
  CHECK(fs::exists(tmp.path / "manifest.json"));
  CHECK(json_schema::validate(res.manifest,
                              load_schema("manifest.schema.json"))
            .empty());

  std::ifstream in(tmp.path / "e1.xml");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("<Spelling>advanteges</Spelling>") != std::string::npos);

  // byte determinism across runs
  TempDir tmp2;
  run_build_xml(corpus, corpus.gold_spans, errors, tmp2.path.string(),
                XmlMode::Fragment);
  std::ifstream in2(tmp2.path / "e1.xml");
  std::stringstream ss2;
  ss2 << in2.rdbuf();
  CHECK(ss.str() == ss2.str());
}

TEST_CASE("mini corpus generation is seed-deterministic") {
  auto a = make_mini_corpus(7, 5);
  auto b = make_mini_corpus(7, 5);
  auto c = make_mini_corpus(8, 5);
  CHECK(a == b);
  CHECK(a != c);
  // loads cleanly
  LoadReport report;
  auto corpus = load_corpus_rows(a, ColumnMapping{}, &report);
  CHECK(corpus.essays.size() == 5);
  CHECK(report.rejected.empty());
  CHECK(validate_corpus(corpus).violations.empty());
}

TEST_CASE("bundled mini corpus matches seed 1") {
  LoadReport report;
  auto corpus =
      load_corpus((kDataDir / "mini_corpus.csv").string(), ColumnMapping{},
                  &report);
  CHECK(corpus.essays.size() == 10);
  CHECK(report.rejected.empty());
  auto regen = load_corpus_rows(make_mini_corpus(1, 10), ColumnMapping{});
  REQUIRE(regen.essays.size() == 10);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK(corpus.essays[i].text == regen.essays[i].text);
}
