#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "essaymark/pipeline.hpp"
#include "essaymark/utf8.hpp"

namespace fs = std::filesystem;
using namespace essaymark;
using nlohmann::json;

namespace {

struct CliState {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
    for (const auto& [k, v] : overrides) cfg.apply(k, v);
    return cfg;
  }
};

void add_override(CLI::App* cmd, CliState& state, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag,
      [&state, key](const std::string& v) {
        state.overrides.emplace_back(key, v);
      },
      help);
}

void add_repeatable_override(CLI::App* cmd, CliState& state,
                             const std::string& flag, const std::string& key,
                             const std::string& help) {
  cmd->add_option_function<std::vector<std::string>>(
      flag,
      [&state, key](const std::vector<std::string>& values) {
        for (const auto& v : values) state.overrides.emplace_back(key, v);
      },
      help);
}

void add_common(CLI::App* cmd, CliState& state) {
  add_override(cmd, state, "--corpus", "corpus", "corpus CSV path");
  add_override(cmd, state, "--output-dir", "output_dir", "output directory");
  add_override(cmd, state, "--jobs", "jobs", "worker threads");
  add_override(cmd, state, "--seed", "seed",
               "seed for synthetic fixture generation");
}

void add_client(CLI::App* cmd, CliState& state) {
  add_override(cmd, state, "--mode", "client_mode", "live | record | replay");
  add_override(cmd, state, "--token", "bearer_token", "bearer token");
}

// --record=<file> / --replay=<file> set both the fixture path and the mode
void add_fixture_flags(CLI::App* cmd, CliState& state,
                       const std::string& fixture_key) {
  cmd->add_option_function<std::string>(
      "--record",
      [&state, fixture_key](const std::string& v) {
        state.overrides.emplace_back(fixture_key, v);
        state.overrides.emplace_back("client_mode", "record");
      },
      "record fixtures to this file");
  cmd->add_option_function<std::string>(
      "--replay",
      [&state, fixture_key](const std::string& v) {
        state.overrides.emplace_back(fixture_key, v);
        state.overrides.emplace_back("client_mode", "replay");
      },
      "replay fixtures from this file");
}

ClientMode parse_mode(const std::string& mode) {
  if (mode == "live") return ClientMode::Live;
  if (mode == "record") return ClientMode::Record;
  if (mode == "replay") return ClientMode::Replay;
  throw ConfigError("unknown client mode: " + mode);
}

Corpus load(const RunConfig& cfg, LoadReport* report = nullptr) {
  if (cfg.corpus_path.empty()) throw ConfigError("no corpus path given");
  Corpus c = load_corpus(cfg.corpus_path, cfg.schema, report);
  if (cfg.repair_clip_left) repair_overlaps_clip_left(c);
  return c;
}

Lexicon load_lexicon(const RunConfig& cfg) {
  std::string path = cfg.lexicon_path;
  if (path.empty()) {
    const char* env = std::getenv("ESSAYMARK_LEXICON");
    if (env) path = env;
  }
  if (path.empty()) throw ConfigError("no lexicon configured (--lexicon)");
  return Lexicon::load(path);
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_report(const fs::path& dir, const std::string& stem, const json& j,
                  const std::string& markdown) {
  write_file(dir / (stem + ".json"), j.dump(2) + "\n");
  write_file(dir / (stem + ".md"), markdown);
}

// ---- stage helpers shared by the subcommands and run-all ----

int do_validate(const RunConfig& cfg, bool quiet) {
  LoadReport load_report;
  Corpus c = load(cfg, &load_report);
  ValidationReport report = validate_corpus(c);
  if (!quiet) {
    write_validation_text(std::cout, report);
    if (!load_report.rejected.empty()) {
      std::cout << "rejected rows: " << load_report.rejected.size() << "\n";
      for (const auto& r : load_report.rejected)
        std::cout << "  row " << r.row << ": " << r.reason << "\n";
    }
    if (load_report.clipped_spans)
      std::cout << "clipped spans: " << load_report.clipped_spans << "\n";
  }
  write_file(fs::path(cfg.output_dir) / "validation.json",
             validation_to_json(report) + "\n");
  return report.violations.empty() ? 0 : 2;
}

std::map<std::string, std::vector<ComponentSpan>> annotate_stage(
    const RunConfig& cfg, const Corpus& corpus) {
  ClientConfig cc;
  cc.endpoint = cfg.annotate_endpoint;
  cc.mode = parse_mode(cfg.client_mode);
  cc.fixture_path = cfg.annotate_fixture;
  cc.bearer_token = cfg.bearer_token;
  cc.policy.concurrency = std::max(1, cfg.jobs);
  AnnotatorClient client(cc);

  std::vector<std::pair<std::string, std::string>> essays;
  for (const auto& e : corpus.essays) essays.emplace_back(e.id, e.text);
  auto outcomes = client.annotate(essays);
  client.save_fixtures();

  std::map<std::string, std::vector<ComponentSpan>> spans;
  for (std::size_t i = 0; i < essays.size(); ++i) {
    const auto& out = outcomes[i];
    for (const auto& w : out.warnings)
      std::cerr << "warning [" << essays[i].first << "]: " << w << "\n";
    if (out.error) {
      std::cerr << "error [" << essays[i].first << "]: " << *out.error << "\n";
      continue;
    }
    spans[essays[i].first] = out.spans;
  }
  return spans;
}

std::map<std::string, std::map<int, std::string>> correct_stage(
    const RunConfig& cfg, const Corpus& corpus) {
  ClientConfig cc;
  cc.endpoint = cfg.correct_endpoint;
  cc.mode = parse_mode(cfg.client_mode);
  cc.fixture_path = cfg.correct_fixture;
  cc.bearer_token = cfg.bearer_token;
  CorrectorClient client(cc);

  std::map<std::string, std::map<int, std::string>> corrections;
  for (const auto& e : corpus.essays) {
    const auto sentences = sentence_split(e.text);
    std::vector<std::string> texts;
    for (const auto& s : sentences) texts.push_back(s.text);
    std::vector<std::string> errors;
    auto corrected = client.correct_all(texts, 16, &errors);
    for (const auto& err : errors)
      std::cerr << "error [" << e.id << "]: " << err << "\n";
    for (std::size_t i = 0; i < corrected.size(); ++i)
      corrections[e.id][static_cast<int>(i)] = corrected[i];
  }
  client.save_fixtures();
  return corrections;
}

struct EditStageResult {
  std::map<std::string, std::vector<ErrorSpan>> error_spans;
  std::map<ErrorLabel, std::size_t> label_counts;
  std::size_t edit_count = 0;
};

EditStageResult extract_edits_stage(
    const RunConfig& cfg, const Corpus& corpus,
    const std::map<std::string, std::map<int, std::string>>& corrections,
    const Lexicon& lexicon) {
  EditStageResult result;
  fs::create_directories(cfg.output_dir);
  std::ofstream edits_out(fs::path(cfg.output_dir) / "edits.jsonl",
                          std::ios::trunc);
  std::vector<ErrorSpan> all_spans;
  for (const auto& e : corpus.essays) {
    auto cit = corrections.find(e.id);
    static const std::map<int, std::string> kNone;
    EssayEdits edits = extract_essay_edits(
        e, cit == corrections.end() ? kNone : cit->second, lexicon);
    write_edits_jsonl(edits_out, edits);
    for (const auto& sent : edits.sentences) {
      for (const auto& op : sent.edits) {
        result.label_counts[op.label]++;
        result.edit_count++;
      }
    }
    all_spans.insert(all_spans.end(), edits.spans.begin(), edits.spans.end());
    result.error_spans[e.id] = std::move(edits.spans);
  }
  write_error_spans_jsonl(
      (fs::path(cfg.output_dir) / "error_spans.jsonl").string(), all_spans);
  return result;
}

void print_edit_summary(const EditStageResult& r) {
  std::cout << "edits: " << r.edit_count << "\n";
  for (ErrorLabel l : kErrorLabels) {
    auto it = r.label_counts.find(l);
    std::cout << "  " << to_string(l) << ": "
              << (it == r.label_counts.end() ? 0 : it->second) << "\n";
  }
}

int eval_spans_stage(const RunConfig& cfg, const Corpus& corpus,
                     const std::map<std::string, std::vector<ComponentSpan>>&
                         predictions,
                     bool print) {
  SpanEvalOptions opts;
  opts.char_overlap = cfg.char_overlap;
  opts.fp_unmatched_pred = cfg.fp_unmatched_pred;
  opts.optimal_matching = cfg.optimal_matching;
  opts.jobs = cfg.jobs;
  MatchTally tally = eval_spans(corpus, predictions, opts);
  write_report(cfg.output_dir, "span_report", span_report_json(tally),
               span_report_markdown(tally));
  if (print) std::cout << span_report_markdown(tally);
  return 0;
}

std::vector<ScoredRecord> scored_records(
    const Corpus& corpus, const std::map<std::string, int>& predicted) {
  std::vector<ScoredRecord> records;
  for (const auto& e : corpus.essays) {
    if (!e.score) continue;
    auto it = predicted.find(e.id);
    if (it == predicted.end()) continue;
    records.push_back({*e.score, it->second, e.demographics});
  }
  return records;
}

int eval_scores_stage(const RunConfig& cfg, const Corpus& corpus, bool print) {
  if (cfg.score_files.empty())
    throw ConfigError("no predicted score files (--pred)");
  std::vector<AgreementRow> rows;
  for (const auto& file : cfg.score_files) {
    auto predicted = load_scores(file);
    ScorePairs pairs;
    pairs.scale_max = cfg.scale_max;
    for (const auto& e : corpus.essays) {
      if (!e.score) continue;
      auto it = predicted.find(e.id);
      if (it == predicted.end()) continue;
      pairs.y_true.push_back(*e.score);
      pairs.y_pred.push_back(it->second);
    }
    AgreementRow row;
    row.name = fs::path(file).filename().string();
    row.n = pairs.y_true.size();
    row.qwk = qwk(pairs);
    row.exact = exact_agreement(pairs);
    row.smd = smd(pairs, {.sample_variance = !cfg.population_variance});
    rows.push_back(std::move(row));
  }
  write_report(cfg.output_dir, "agreement_report", agreement_report_json(rows),
               agreement_report_markdown(rows));
  if (print) std::cout << agreement_report_markdown(rows);
  return 0;
}

int bias_report_stage(const RunConfig& cfg, const Corpus& corpus, bool print) {
  if (cfg.score_files.empty())
    throw ConfigError("no predicted score file (--pred)");
  auto predicted = load_scores(cfg.score_files.front());
  BiasOptions opts;
  opts.small_n_threshold = cfg.subgroup_threshold;
  opts.scale_max = cfg.scale_max;
  opts.smd.sample_variance = !cfg.population_variance;
  BiasReport report = subgroup_bias(scored_records(corpus, predicted), opts);
  write_report(cfg.output_dir, "bias_report", bias_report_json(report),
               bias_report_markdown(report));
  if (print) std::cout << bias_report_markdown(report);
  return 0;
}

void require_one_source(const std::string& file, const std::string& endpoint,
                        const std::string& fixture, const std::string& what) {
  const bool has_file = !file.empty();
  const bool has_remote = !endpoint.empty() || !fixture.empty();
  if (has_file == has_remote)
    throw ConfigError("exactly one " + what +
                      " source required (file or endpoint/fixture)");
}

int run_all(const RunConfig& cfg) {
  LoadReport load_report;
  Corpus corpus = load(cfg, &load_report);
  ValidationReport validation = validate_corpus(corpus);
  write_file(fs::path(cfg.output_dir) / "validation.json",
             validation_to_json(validation) + "\n");
  if (!validation.violations.empty()) {
    std::cerr << "corpus validation failed ("
              << validation.violations.size() << " violations)\n";
    return 2;
  }

  require_one_source(cfg.predictions_file, cfg.annotate_endpoint,
                     cfg.annotate_fixture, "component-span");
  std::map<std::string, std::vector<ComponentSpan>> predictions =
      cfg.predictions_file.empty()
          ? annotate_stage(cfg, corpus)
          : load_predictions_jsonl(cfg.predictions_file);
  write_predictions_jsonl(
      (fs::path(cfg.output_dir) / "predictions.jsonl").string(), predictions);

  require_one_source(cfg.corrections_file, cfg.correct_endpoint,
                     cfg.correct_fixture, "correction");
  std::map<std::string, std::map<int, std::string>> corrections =
      cfg.corrections_file.empty()
          ? correct_stage(cfg, corpus)
          : load_corrections_jsonl(cfg.corrections_file);

  Lexicon lexicon = load_lexicon(cfg);
  EditStageResult edits = extract_edits_stage(cfg, corpus, corrections, lexicon);
  print_edit_summary(edits);

  const XmlMode mode =
      cfg.xml_mode == "document" ? XmlMode::Document : XmlMode::Fragment;
  run_build_xml(corpus, predictions, edits.error_spans,
                (fs::path(cfg.output_dir) / "xml").string(), mode);

  eval_spans_stage(cfg, corpus, predictions, false);
  if (!cfg.score_files.empty()) {
    eval_scores_stage(cfg, corpus, false);
    bias_report_stage(cfg, corpus, false);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"essaymark: corpus annotation and evaluation toolkit"};
  app.require_subcommand(1);
  CliState state;
  app.add_option("--config", state.config_path,
                 "key=value config file (CLI flags win)");

  std::string local_predictions, local_errors, local_corrections;
  bool quiet = false;

  auto* validate_cmd =
      app.add_subcommand("validate", "load and validate a corpus");
  add_common(validate_cmd, state);
  add_override(validate_cmd, state, "--repair", "repair",
               "clip-left: truncate later overlapping gold spans");
  validate_cmd->add_flag("--quiet", quiet, "suppress the text report");

  auto* annotate_cmd =
      app.add_subcommand("annotate", "fetch component spans from a remote annotator");
  add_common(annotate_cmd, state);
  add_client(annotate_cmd, state);
  add_override(annotate_cmd, state, "--endpoint", "annotate_endpoint",
               "annotator endpoint");
  add_fixture_flags(annotate_cmd, state, "annotate_fixture");

  auto* correct_cmd =
      app.add_subcommand("correct", "fetch sentence corrections from a remote GEC service");
  add_common(correct_cmd, state);
  add_client(correct_cmd, state);
  add_override(correct_cmd, state, "--endpoint", "correct_endpoint",
               "corrector endpoint");
  add_fixture_flags(correct_cmd, state, "correct_fixture");

  auto* edits_cmd = app.add_subcommand(
      "extract-edits", "extract and classify edits from corrected sentences");
  add_common(edits_cmd, state);
  edits_cmd->add_option("--corrections", local_corrections,
                        "corrections JSONL file")
      ->required();
  add_override(edits_cmd, state, "--lexicon", "lexicon", "word list file");

  auto* xml_cmd =
      app.add_subcommand("build-xml", "embed spans into per-essay XML files");
  add_common(xml_cmd, state);
  xml_cmd->add_option("--predictions", local_predictions,
                      "component spans JSONL (default: gold spans)");
  xml_cmd->add_option("--errors", local_errors, "error spans JSONL");
  add_override(xml_cmd, state, "--xml-mode", "xml_mode",
               "fragment | document");

  auto* eval_spans_cmd =
      app.add_subcommand("eval-spans", "score predicted spans against gold");
  add_common(eval_spans_cmd, state);
  eval_spans_cmd
      ->add_option("--predictions", local_predictions, "predictions JSONL")
      ->required();
  add_override(eval_spans_cmd, state, "--char-overlap", "char_overlap",
               "on|off: overlap on char offsets instead of words");
  add_override(eval_spans_cmd, state, "--fp-unmatched-pred",
               "fp_unmatched_pred", "on|off: count unmatched predictions as FP");
  add_override(eval_spans_cmd, state, "--optimal", "optimal_matching",
               "on|off: optimal matching for small instances");

  auto* eval_scores_cmd =
      app.add_subcommand("eval-scores", "scoring agreement report");
  add_common(eval_scores_cmd, state);
  add_repeatable_override(eval_scores_cmd, state, "--pred", "scores",
                          "predicted scores file (repeatable)");
  add_override(eval_scores_cmd, state, "--scale-max", "scale_max",
               "score scale maximum");
  add_override(eval_scores_cmd, state, "--population-variance",
               "population_variance", "on|off");

  auto* bias_cmd = app.add_subcommand("bias-report", "per-subgroup SMD report");
  add_common(bias_cmd, state);
  add_override(bias_cmd, state, "--pred", "scores", "predicted scores file");
  add_override(bias_cmd, state, "--threshold", "subgroup_threshold",
               "small-subgroup flag threshold");
  add_override(bias_cmd, state, "--population-variance",
               "population_variance", "on|off");

  auto* run_cmd = app.add_subcommand("run-all", "full pipeline");
  add_common(run_cmd, state);
  add_client(run_cmd, state);
  add_override(run_cmd, state, "--predictions", "predictions", "spans JSONL");
  add_override(run_cmd, state, "--annotate-endpoint", "annotate_endpoint", "");
  add_override(run_cmd, state, "--annotate-fixture", "annotate_fixture", "");
  add_override(run_cmd, state, "--corrections", "corrections",
               "corrections JSONL");
  add_override(run_cmd, state, "--correct-endpoint", "correct_endpoint", "");
  add_override(run_cmd, state, "--correct-fixture", "correct_fixture", "");
  add_repeatable_override(run_cmd, state, "--pred", "scores",
                          "predicted scores file (repeatable)");
  add_override(run_cmd, state, "--lexicon", "lexicon", "word list file");
  add_override(run_cmd, state, "--xml-mode", "xml_mode", "fragment | document");

  auto* fixture_cmd = app.add_subcommand(
      "gen-fixture", "write the synthetic mini-corpus CSV");
  add_common(fixture_cmd, state);
  std::string fixture_out = "mini_corpus.csv";
  fixture_cmd->add_option("--out", fixture_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = state.resolve();

    if (validate_cmd->parsed()) return do_validate(cfg, quiet);

    if (annotate_cmd->parsed()) {
      Corpus corpus = load(cfg);
      fs::create_directories(cfg.output_dir);
      auto spans = annotate_stage(cfg, corpus);
      const auto out = fs::path(cfg.output_dir) / "predictions.jsonl";
      write_predictions_jsonl(out.string(), spans);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    }

    if (correct_cmd->parsed()) {
      Corpus corpus = load(cfg);
      auto corrections = correct_stage(cfg, corpus);
      fs::create_directories(cfg.output_dir);
      std::ofstream out(fs::path(cfg.output_dir) / "corrections.jsonl",
                        std::ios::trunc);
      for (const auto& [id, sentences] : corrections) {
        for (const auto& [idx, text] : sentences) {
          json j = {{"essay_id", id},
                    {"sentence_index", idx},
                    {"corrected", text}};
          out << j.dump() << "\n";
        }
      }
      std::cout << "wrote corrections.jsonl\n";
      return 0;
    }

    if (edits_cmd->parsed()) {
      Corpus corpus = load(cfg);
      auto corrections = load_corrections_jsonl(local_corrections);
      Lexicon lexicon = load_lexicon(cfg);
      auto result = extract_edits_stage(cfg, corpus, corrections, lexicon);
      print_edit_summary(result);
      return 0;
    }

    if (xml_cmd->parsed()) {
      Corpus corpus = load(cfg);
      auto components = local_predictions.empty()
                            ? corpus.gold_spans
                            : load_predictions_jsonl(local_predictions);
      std::map<std::string, std::vector<ErrorSpan>> errors;
      if (!local_errors.empty()) errors = load_error_spans_jsonl(local_errors);
      const XmlMode mode =
          cfg.xml_mode == "document" ? XmlMode::Document : XmlMode::Fragment;
      auto result = run_build_xml(corpus, components, errors,
                                  (fs::path(cfg.output_dir) / "xml").string(),
                                  mode);
      std::cout << "wrote " << result.files_written << " XML files\n";
      return 0;
    }

    if (eval_spans_cmd->parsed()) {
      Corpus corpus = load(cfg);
      auto predictions = load_predictions_jsonl(local_predictions);
      return eval_spans_stage(cfg, corpus, predictions, true);
    }

    if (eval_scores_cmd->parsed()) {
      Corpus corpus = load(cfg);
      return eval_scores_stage(cfg, corpus, true);
    }

    if (bias_cmd->parsed()) {
      Corpus corpus = load(cfg);
      return bias_report_stage(cfg, corpus, true);
    }

    if (run_cmd->parsed()) return run_all(cfg);

    if (fixture_cmd->parsed()) {
      auto rows = make_mini_corpus(cfg.seed);
      std::ofstream out(fixture_out, std::ios::trunc | std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + fixture_out);
      for (const auto& row : rows) csv::write_row(out, row);
      std::cout << "wrote " << fixture_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
