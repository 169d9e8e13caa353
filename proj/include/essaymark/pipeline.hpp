#ifndef ESSAYMARK_PIPELINE_HPP
#define ESSAYMARK_PIPELINE_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "essaymark/corpus.hpp"
#include "essaymark/edits.hpp"
#include "essaymark/matcher.hpp"
#include "essaymark/metrics.hpp"
#include "essaymark/model_client.hpp"
#include "essaymark/spans.hpp"

namespace essaymark {

// Flat key=value config file with CLI override precedence: values set on the
// command line win over the file.
struct RunConfig {
  std::string corpus_path;
  ColumnMapping schema;
  std::string output_dir = "out";

  // span sources: a predictions file or a remote annotator, never both
  std::string predictions_file;  // JSONL {essay_id, start, end, label}
  std::string annotate_endpoint;
  std::string annotate_fixture;

  // correction sources
  std::string corrections_file;  // JSONL {essay_id, sentence_index, corrected}
  std::string correct_endpoint;
  std::string correct_fixture;

  std::string client_mode = "live";  // live | record | replay
  std::string bearer_token;

  // predicted score files, one report row each
  std::vector<std::string> score_files;

  std::string lexicon_path;

  // matcher flags
  bool char_overlap = false;
  bool fp_unmatched_pred = true;
  bool optimal_matching = false;

  // metrics flags
  int scale_max = 6;
  bool population_variance = false;
  std::size_t subgroup_threshold = 50;

  int jobs = 1;
  unsigned seed = 1;  // synthetic fixture generation only
  bool repair_clip_left = false;
  std::string xml_mode = "fragment";  // fragment | document

  void apply(const std::string& key, const std::string& value);
  static RunConfig from_file(const std::string& path);
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- prediction / score / correction file formats ----

std::map<std::string, std::vector<ComponentSpan>> load_predictions_jsonl(
    const std::string& path);

void write_predictions_jsonl(
    const std::string& path,
    const std::map<std::string, std::vector<ComponentSpan>>& spans);

// {essay_id, sentence_index, corrected}, grouped per essay, index-sorted.
std::map<std::string, std::map<int, std::string>> load_corrections_jsonl(
    const std::string& path);

// JSONL {essay_id, score} or two-column CSV with header.
std::map<std::string, int> load_scores(const std::string& path);

void write_error_spans_jsonl(const std::string& path,
                             const std::vector<ErrorSpan>& spans);
std::map<std::string, std::vector<ErrorSpan>> load_error_spans_jsonl(
    const std::string& path);

// ---- evaluation ----

struct SpanEvalOptions {
  bool char_overlap = false;
  bool fp_unmatched_pred = true;
  bool optimal_matching = false;
  int jobs = 1;
};

// Per-essay matching, tallies summed in corpus order regardless of jobs.
MatchTally eval_spans(const Corpus& corpus,
                      const std::map<std::string, std::vector<ComponentSpan>>&
                          predictions,
                      const SpanEvalOptions& opts);

nlohmann::json span_report_json(const MatchTally& t);
std::string span_report_markdown(const MatchTally& t);

struct AgreementRow {
  std::string name;
  double qwk = 0.0;
  double exact = 0.0;
  double smd = 0.0;
  std::size_t n = 0;
};

// One row per prediction set, plus avg/min/max summary.
nlohmann::json agreement_report_json(const std::vector<AgreementRow>& rows);
std::string agreement_report_markdown(const std::vector<AgreementRow>& rows);

nlohmann::json bias_report_json(const BiasReport& r);
std::string bias_report_markdown(const BiasReport& r);

// ---- edit extraction ----

struct SentenceEdits {
  int sentence_index = 0;
  std::vector<EditOp> edits;  // token ranges local to the sentence
};

struct EssayEdits {
  std::string essay_id;
  std::vector<SentenceEdits> sentences;
  std::vector<ErrorSpan> spans;  // essay char coordinates
};

// Applies per-sentence corrections, aligns, classifies, and remaps spans to
// essay coordinates via the sentence ranges.
EssayEdits extract_essay_edits(const Essay& essay,
                               const std::map<int, std::string>& corrections,
                               const Lexicon& lexicon);

void write_edits_jsonl(std::ostream& out, const EssayEdits& edits);

// ---- high-level stages ----

struct BuildXmlResult {
  std::size_t files_written = 0;
  nlohmann::json manifest;
};

// Writes <id>.xml per essay plus manifest.json into out_dir. Deterministic
// given identical inputs.
BuildXmlResult run_build_xml(
    const Corpus& corpus,
    const std::map<std::string, std::vector<ComponentSpan>>& components,
    const std::map<std::string, std::vector<ErrorSpan>>& errors,
    const std::string& out_dir, XmlMode mode);

// The bundled synthetic mini-corpus, reproducible from a seed. Returns CSV
// rows with PERSUADE-shaped headers.
std::vector<csv::Row> make_mini_corpus(unsigned seed, std::size_t essays = 10);

}  // namespace essaymark

#endif
