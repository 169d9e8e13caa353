#include "essaymark/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "essaymark/utf8.hpp"

namespace essaymark {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: " + v);
}

long parse_int(const std::string& v) {
  try {
    std::size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw ConfigError("not an integer: " + v);
    return n;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: " + v);
  }
}

std::string fmt(double v, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << std::fixed << v;
  return out.str();
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "corpus") corpus_path = value;
  else if (key == "output_dir") output_dir = value;
  else if (key == "predictions") predictions_file = value;
  else if (key == "annotate_endpoint") annotate_endpoint = value;
  else if (key == "annotate_fixture") annotate_fixture = value;
  else if (key == "corrections") corrections_file = value;
  else if (key == "correct_endpoint") correct_endpoint = value;
  else if (key == "correct_fixture") correct_fixture = value;
  else if (key == "client_mode") client_mode = value;
  else if (key == "bearer_token") bearer_token = value;
  else if (key == "scores") score_files.push_back(value);
  else if (key == "lexicon") lexicon_path = value;
  else if (key == "char_overlap") char_overlap = parse_bool(value);
  else if (key == "fp_unmatched_pred") fp_unmatched_pred = parse_bool(value);
  else if (key == "optimal_matching") optimal_matching = parse_bool(value);
  else if (key == "scale_max") scale_max = static_cast<int>(parse_int(value));
  else if (key == "population_variance") population_variance = parse_bool(value);
  else if (key == "subgroup_threshold")
    subgroup_threshold = static_cast<std::size_t>(parse_int(value));
  else if (key == "jobs") jobs = static_cast<int>(parse_int(value));
  else if (key == "seed") seed = static_cast<unsigned>(parse_int(value));
  else if (key == "repair") repair_clip_left = (value == "clip-left");
  else if (key == "xml_mode") xml_mode = value;
  else if (key == "column.id") schema.id = value;
  else if (key == "column.text") schema.text = value;
  else if (key == "column.discourse_type") schema.discourse_type = value;
  else if (key == "column.discourse_start") schema.discourse_start = value;
  else if (key == "column.discourse_end") schema.discourse_end = value;
  else if (key == "column.score") schema.score = value;
  else if (key == "column.grade") schema.grade = value;
  else if (key == "column.split") schema.split = value;
  else if (key == "column.gender") schema.gender = value;
  else if (key == "column.race_ethnicity") schema.race_ethnicity = value;
  else if (key == "column.ell") schema.ell = value;
  else if (key == "column.economically_disadvantaged")
    schema.economically_disadvantaged = value;
  else if (key == "column.identified_disability")
    schema.identified_disability = value;
  else
    throw ConfigError("unknown config key: " + key);
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    cfg.apply(key, value);
  }
  return cfg;
}

std::map<std::string, std::vector<ComponentSpan>> load_predictions_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path);
  std::map<std::string, std::vector<ComponentSpan>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad JSON");
    auto label = component_label_from_string(j.at("label").get<std::string>());
    if (!label)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown label");
    const std::string id = j.at("essay_id").get<std::string>();
    out[id].push_back({id, j.at("start").get<std::size_t>(),
                       j.at("end").get<std::size_t>(), *label});
  }
  for (auto& [id, spans] : out)
    std::stable_sort(spans.begin(), spans.end(),
                     [](const ComponentSpan& a, const ComponentSpan& b) {
                       return a.start < b.start ||
                              (a.start == b.start && a.end < b.end);
                     });
  return out;
}

void write_predictions_jsonl(
    const std::string& path,
    const std::map<std::string, std::vector<ComponentSpan>>& spans) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [id, list] : spans) {
    for (const auto& s : list) {
      json j = {{"essay_id", id},
                {"start", s.start},
                {"end", s.end},
                {"label", std::string(to_string(s.label))}};
      out << j.dump() << "\n";
    }
  }
}

std::map<std::string, std::map<int, std::string>> load_corrections_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corrections: " + path);
  std::map<std::string, std::map<int, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad JSON");
    out[j.at("essay_id").get<std::string>()]
       [j.at("sentence_index").get<int>()] =
           j.at("corrected").get<std::string>();
  }
  return out;
}

std::map<std::string, int> load_scores(const std::string& path) {
  std::map<std::string, int> out;
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open scores: " + path);
  std::string first;
  std::getline(probe, first);
  probe.close();
  if (!first.empty() && first[0] == '{') {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      json j = json::parse(line);
      out[j.at("essay_id").get<std::string>()] = j.at("score").get<int>();
    }
  } else {
    auto rows = csv::parse_file(path);
    if (rows.size() < 2 || rows[0].size() < 2)
      throw std::runtime_error("scores CSV needs a header and two columns");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() < 2) continue;
      out[rows[r][0]] = std::stoi(rows[r][1]);
    }
  }
  return out;
}

void write_error_spans_jsonl(const std::string& path,
                             const std::vector<ErrorSpan>& spans) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& s : spans) {
    json j = {{"essay_id", s.essay_id},
              {"start", s.start},
              {"end", s.end},
              {"label", std::string(to_string(s.label))}};
    out << j.dump() << "\n";
  }
}

std::map<std::string, std::vector<ErrorSpan>> load_error_spans_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open error spans: " + path);
  std::map<std::string, std::vector<ErrorSpan>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad JSON");
    auto label = error_label_from_string(j.at("label").get<std::string>());
    if (!label)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown label");
    const std::string id = j.at("essay_id").get<std::string>();
    out[id].push_back({id, j.at("start").get<std::size_t>(),
                       j.at("end").get<std::size_t>(), *label});
  }
  return out;
}

MatchTally eval_spans(const Corpus& corpus,
                      const std::map<std::string, std::vector<ComponentSpan>>&
                          predictions,
                      const SpanEvalOptions& opts) {
  const std::size_t n = corpus.essays.size();
  std::vector<MatchTally> per_essay(n);
  const int workers = std::max(1, std::min<int>(opts.jobs, static_cast<int>(n)));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    static const std::vector<ComponentSpan> kNone;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      const Essay& e = corpus.essays[i];
      auto git = corpus.gold_spans.find(e.id);
      const auto& gold_spans = git == corpus.gold_spans.end() ? kNone : git->second;
      auto pit = predictions.find(e.id);
      const auto& pred_spans = pit == predictions.end() ? kNone : pit->second;
      std::vector<WordSpan> gold, pred;
      if (opts.char_overlap) {
        gold = to_char_spans(gold_spans);
        pred = to_char_spans(pred_spans);
      } else {
        gold = to_word_spans(e.text, gold_spans);
        pred = to_word_spans(e.text, pred_spans);
      }
      MatchResult result = opts.optimal_matching && pred.size() <= 12 &&
                                   gold.size() <= 12
                               ? match_spans_optimal(gold, pred)
                               : match_spans(gold, pred);
      per_essay[i] =
          tally(result, gold, pred, {.fp_unmatched_pred = opts.fp_unmatched_pred});
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // ordered reduction: totals identical regardless of schedule
  MatchTally total;
  for (const auto& t : per_essay) total += t;
  return total;
}

json span_report_json(const MatchTally& t) {
  json per_label = json::array();
  for (ComponentLabel l : kComponentLabels) {
    auto it = t.per_label.find(l);
    const LabelCounts c = it == t.per_label.end() ? LabelCounts{} : it->second;
    per_label.push_back({{"label", std::string(to_string(l))},
                         {"key", std::string(short_key(l))},
                         {"tp", c.tp},
                         {"fp", c.fp},
                         {"fn", c.fn},
                         {"f1", f1_from_counts(c.tp, c.fp, c.fn)}});
  }
  return {{"per_label", per_label}, {"macro_f1", macro_f1(t)}};
}

std::string span_report_markdown(const MatchTally& t) {
  std::ostringstream out;
  out << "| Label | TP | FP | FN | F1 |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (ComponentLabel l : kComponentLabels) {
    auto it = t.per_label.find(l);
    const LabelCounts c = it == t.per_label.end() ? LabelCounts{} : it->second;
    out << "| " << short_key(l) << " | " << c.tp << " | " << c.fp << " | "
        << c.fn << " | " << fmt(f1_from_counts(c.tp, c.fp, c.fn), 3) << " |\n";
  }
  out << "\nMacro F1: " << fmt(macro_f1(t), 3) << "\n";
  return out.str();
}

namespace {

json summary_stat(const std::vector<AgreementRow>& rows,
                  double AgreementRow::*member) {
  double sum = 0.0, mn = rows[0].*member, mx = rows[0].*member;
  for (const auto& r : rows) {
    sum += r.*member;
    mn = std::min(mn, r.*member);
    mx = std::max(mx, r.*member);
  }
  return {{"avg", sum / static_cast<double>(rows.size())},
          {"min", mn},
          {"max", mx}};
}

}  // namespace

json agreement_report_json(const std::vector<AgreementRow>& rows) {
  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back({{"name", r.name},
                     {"n", r.n},
                     {"qwk", r.qwk},
                     {"exact", r.exact},
                     {"smd", r.smd}});
  json report = {{"rows", jrows}};
  if (!rows.empty()) {
    report["summary"] = {{"qwk", summary_stat(rows, &AgreementRow::qwk)},
                         {"exact", summary_stat(rows, &AgreementRow::exact)},
                         {"smd", summary_stat(rows, &AgreementRow::smd)}};
  }
  return report;
}

std::string agreement_report_markdown(const std::vector<AgreementRow>& rows) {
  std::ostringstream out;
  out << "| Predictions | n | QWK | Exa | SMD |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (const auto& r : rows)
    out << "| " << r.name << " | " << r.n << " | " << fmt(r.qwk, 3) << " | "
        << fmt(r.exact, 1) << " | " << fmt(r.smd, 3) << " |\n";
  if (rows.size() > 1) {
    json s = agreement_report_json(rows)["summary"];
    out << "\n| Stat | Avg | Min | Max |\n|---|---:|---:|---:|\n";
    out << "| QWK | " << fmt(s["qwk"]["avg"].get<double>(), 3) << " | "
        << fmt(s["qwk"]["min"].get<double>(), 3) << " | "
        << fmt(s["qwk"]["max"].get<double>(), 3) << " |\n";
    out << "| Exa | " << fmt(s["exact"]["avg"].get<double>(), 1) << " | "
        << fmt(s["exact"]["min"].get<double>(), 1) << " | "
        << fmt(s["exact"]["max"].get<double>(), 1) << " |\n";
    out << "| SMD | " << fmt(s["smd"]["avg"].get<double>(), 3) << " | "
        << fmt(s["smd"]["min"].get<double>(), 3) << " | "
        << fmt(s["smd"]["max"].get<double>(), 3) << " |\n";
  }
  return out.str();
}

json bias_report_json(const BiasReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"key", row.key},
                    {"n", row.n},
                    {"smd", row.smd},
                    {"flagged_small_n", row.flagged_small_n}});
  return {{"small_n_threshold", r.small_n_threshold},
          {"rows", rows},
          {"notes", r.notes}};
}

std::string bias_report_markdown(const BiasReport& r) {
  std::ostringstream out;
  out << "| Key | n | SMD | |\n|---|---:|---:|---|\n";
  for (const auto& row : r.rows)
    out << "| " << row.key << " | " << row.n << " | " << fmt(row.smd, 2)
        << " | " << (row.flagged_small_n ? "small n" : "") << " |\n";
  for (const auto& note : r.notes) out << "\n_" << note << "_\n";
  return out.str();
}

EssayEdits extract_essay_edits(const Essay& essay,
                               const std::map<int, std::string>& corrections,
                               const Lexicon& lexicon) {
  EssayEdits out;
  out.essay_id = essay.id;
  const auto sentences = sentence_split(essay.text);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& sent = sentences[i];
    auto cit = corrections.find(static_cast<int>(i));
    const std::string corrected =
        cit == corrections.end() ? sent.text : cit->second;
    const auto orig_tokens = tokenize(sent.text);
    const auto corr_tokens = tokenize(corrected);
    auto edits = classify_edits(align(orig_tokens, corr_tokens), lexicon);
    if (edits.empty()) continue;
    auto spans = edits_to_spans(edits, orig_tokens, utf8::length(sent.text),
                                essay.id);
    for (auto& s : spans) {
      s.start += sent.start;  // remap to essay coordinates
      s.end += sent.start;
    }
    out.spans.insert(out.spans.end(), spans.begin(), spans.end());
    out.sentences.push_back({static_cast<int>(i), std::move(edits)});
  }
  return out;
}

void write_edits_jsonl(std::ostream& out, const EssayEdits& edits) {
  for (const auto& sent : edits.sentences) {
    for (const auto& e : sent.edits) {
      json j = {{"essay_id", edits.essay_id},
                {"sentence_index", sent.sentence_index},
                {"tag", std::string(to_string(e.tag))},
                {"orig", e.orig_text},
                {"corr", e.corr_text},
                {"label", std::string(to_string(e.label))}};
      out << j.dump() << "\n";
    }
  }
}

BuildXmlResult run_build_xml(
    const Corpus& corpus,
    const std::map<std::string, std::vector<ComponentSpan>>& components,
    const std::map<std::string, std::vector<ErrorSpan>>& errors,
    const std::string& out_dir, XmlMode mode) {
  std::filesystem::create_directories(out_dir);
  BuildXmlResult result;
  json essays = json::array();
  static const std::vector<ComponentSpan> kNoComponents;
  static const std::vector<ErrorSpan> kNoErrors;
  for (const auto& e : corpus.essays) {
    auto cit = components.find(e.id);
    auto eit = errors.find(e.id);
    try {
      AnnotatedDoc doc = normalize(
          e.id, e.text, cit == components.end() ? kNoComponents : cit->second,
          eit == errors.end() ? kNoErrors : eit->second);
      const std::string xml = embed_xml(doc, mode);
      const std::string file = e.id + ".xml";
      std::ofstream out(std::filesystem::path(out_dir) / file,
                        std::ios::trunc | std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + file);
      out << xml;
      essays.push_back({{"essay_id", e.id},
                        {"file", file},
                        {"components", doc.components.size()},
                        {"errors", doc.errors.size()}});
      result.files_written++;
    } catch (const std::exception& ex) {
      throw std::runtime_error("essay " + e.id + ": " + ex.what());
    }
  }
  result.manifest = {
      {"mode", mode == XmlMode::Document ? "document" : "fragment"},
      {"essays", essays}};
  std::ofstream mf(std::filesystem::path(out_dir) / "manifest.json",
                   std::ios::trunc);
  mf << result.manifest.dump(2) << "\n";
  return result;
}

std::vector<csv::Row> make_mini_corpus(unsigned seed, std::size_t essays) {
  std::mt19937 rng(seed);
  static const std::vector<std::string> nouns = {
      "car",    "city",   "school", "student", "phone",
      "planet", "driver", "future", "teacher", "street"};
  static const std::vector<std::string> verbs = {
      "helps", "changes", "improves", "affects", "supports"};
  static const std::vector<std::string> misspelled = {
      "advanteges", "disadvanteges", "noice", "becuase", "definately"};

  std::vector<csv::Row> rows;
  rows.push_back({"essay_id", "full_text", "discourse_type", "discourse_start",
                  "discourse_end", "holistic_essay_score", "grade_level",
                  "competition_set", "gender", "race_ethnicity", "ell_status",
                  "economically_disadvantaged", "student_disability_status"});

  static const char* races[] = {"White",
                                "Hispanic/Latino",
                                "Black/African American",
                                "Asian/Pacific Islander",
                                "Two or more races/Other",
                                "American Indian/Alaskan Native"};

  for (std::size_t n = 0; n < essays; ++n) {
    const std::string id = "mini_" + std::to_string(n + 1);
    std::uniform_int_distribution<std::size_t> noun_pick(0, nouns.size() - 1);
    std::uniform_int_distribution<std::size_t> verb_pick(0, verbs.size() - 1);
    std::uniform_int_distribution<int> count_pick(4, 7);
    std::uniform_int_distribution<int> coin(0, 3);

    const int sentence_count = count_pick(rng);
    std::string text;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (int s = 0; s < sentence_count; ++s) {
      if (!text.empty()) text += " ";
      std::size_t start = text.size();  // ASCII only, bytes == scalars
      std::string noun = nouns[noun_pick(rng)];
      if (coin(rng) == 0) {
        std::uniform_int_distribution<std::size_t> miss(0, misspelled.size() - 1);
        noun = misspelled[miss(rng)];
      }
      std::string sentence = "The " + noun + " " + verbs[verb_pick(rng)] +
                             " the " + nouns[noun_pick(rng)] + ".";
      sentence[0] = 'T';
      text += sentence;
      ranges.emplace_back(start, text.size());
    }

    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>
        spans;
    for (int s = 0; s < sentence_count; ++s) {
      std::string label;
      if (s == 0) label = "Lead";
      else if (s == 1) label = "Position";
      else if (s == sentence_count - 1) label = "Concluding Statement";
      else if (s % 2 == 0) label = "Evidence";
      else label = coin(rng) == 0 ? "Counterclaim" : "Claim";
      spans.emplace_back(label, ranges[static_cast<std::size_t>(s)]);
    }

    std::uniform_int_distribution<int> score_pick(1, 6);
    const int score = score_pick(rng);
    const std::string grade = std::to_string(6 + static_cast<int>(n) % 7);
    const std::string split = n < essays / 2 ? "train" : "test";
    const std::string gender = n % 2 == 0 ? "F" : "M";
    const std::string race = races[n % 6];
    const std::string ell = n % 3 == 0 ? "Yes" : "No";
    const std::string econ =
        n % 2 == 0 ? "Economically disadvantaged" : "Not economically disadvantaged";
    const std::string dis = n % 4 == 0 ? "Identified as having disability"
                                       : "Not identified as having disability";
    for (const auto& [label, range] : spans) {
      rows.push_back({id, text, label, std::to_string(range.first),
                      std::to_string(range.second), std::to_string(score),
                      grade, split, gender, race, ell, econ, dis});
    }
  }
  return rows;
}

}  // namespace essaymark
