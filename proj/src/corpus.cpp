#include "essaymark/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "essaymark/utf8.hpp"

namespace essaymark {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Offsets in the corpus sometimes carry a trailing ".0".
std::optional<long> parse_offset(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size()) return std::nullopt;
    if (v != std::floor(v)) return std::nullopt;
    return static_cast<long>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<int> parse_int(const std::string& s) {
  auto v = parse_offset(s);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<bool> parse_flag(const std::string& raw) {
  std::string v = lower(trim(raw));
  if (v == "yes" || v == "true" || v == "1" || v == "y") return true;
  if (v == "no" || v == "false" || v == "0" || v == "n" ||
      v == "not identified as having disability" ||
      v == "not economically disadvantaged")
    return false;
  if (v.find("disadvantaged") != std::string::npos ||
      v.find("disability") != std::string::npos)
    return true;
  return std::nullopt;
}

std::optional<Gender> parse_gender(const std::string& raw) {
  std::string v = lower(trim(raw));
  if (v == "f" || v == "female") return Gender::Female;
  if (v == "m" || v == "male") return Gender::Male;
  if (v.empty() || v == "unknown" || v == "na") return std::nullopt;
  return Gender::Other;
}

std::optional<RaceEthnicity> parse_race(const std::string& raw) {
  std::string v = lower(trim(raw));
  if (v.empty() || v == "unknown" || v == "na") return std::nullopt;
  if (v.find("white") != std::string::npos) return RaceEthnicity::WC;
  if (v.find("hispanic") != std::string::npos || v.find("latino") != std::string::npos)
    return RaceEthnicity::HL;
  if (v.find("black") != std::string::npos || v.find("african") != std::string::npos)
    return RaceEthnicity::BA;
  if (v.find("asian") != std::string::npos || v.find("pacific") != std::string::npos)
    return RaceEthnicity::AP;
  if (v.find("two or more") != std::string::npos || v.find("mix") != std::string::npos ||
      v.find("other") != std::string::npos)
    return RaceEthnicity::Mix;
  if (v.find("american indian") != std::string::npos ||
      v.find("alaskan") != std::string::npos || v.find("native") != std::string::npos)
    return RaceEthnicity::Nat;
  return std::nullopt;
}

Grade parse_grade(const std::string& raw) {
  auto v = parse_int(raw);
  if (v && *v >= 6 && *v <= 12) return static_cast<Grade>(*v);
  return Grade::Unknown;
}

std::size_t whitespace_token_count(const std::string& text) {
  std::size_t n = 0;
  bool in_tok = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_tok = false;
    } else if (!in_tok) {
      in_tok = true;
      ++n;
    }
  }
  return n;
}

}  // namespace

const Essay* Corpus::find_essay(const std::string& id) const {
  for (const auto& e : essays)
    if (e.id == id) return &e;
  return nullptr;
}

Corpus load_corpus(const std::string& path, const ColumnMapping& schema,
                   LoadReport* report) {
  if (!std::filesystem::exists(path)) throw FileNotFound(path);
  return load_corpus_rows(csv::parse_file(path), schema, report);
}

Corpus load_corpus_rows(const std::vector<csv::Row>& rows,
                        const ColumnMapping& schema, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  if (rows.empty()) throw MissingColumn(schema.id);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[trim(rows[0][i])] = i;

  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw MissingColumn(name);
    return it->second;
  };
  auto optional_col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    if (it == col.end()) return std::nullopt;
    return it->second;
  };

  const std::size_t c_id = require(schema.id);
  const std::size_t c_text = require(schema.text);
  const std::size_t c_type = require(schema.discourse_type);
  const std::size_t c_start = require(schema.discourse_start);
  const std::size_t c_end = require(schema.discourse_end);
  const std::size_t c_score = require(schema.score);
  const auto c_grade = optional_col(schema.grade);
  const auto c_split = optional_col(schema.split);
  const auto c_srcdep = optional_col(schema.source_dependent);
  const auto c_gender = optional_col(schema.gender);
  const auto c_race = optional_col(schema.race_ethnicity);
  const auto c_ell = optional_col(schema.ell);
  const auto c_econ = optional_col(schema.economically_disadvantaged);
  const auto c_dis = optional_col(schema.identified_disability);

  Corpus corpus;
  std::unordered_map<std::string, std::size_t> essay_index;
  std::unordered_map<std::string, std::size_t> essay_cp_len;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto reject = [&](const std::string& reason) {
      rep.rejected.push_back({r + 1, reason});
    };
    auto field = [&](std::size_t c) -> const std::string& {
      static const std::string empty;
      return c < row.size() ? row[c] : empty;
    };

    const std::string id = trim(field(c_id));
    if (id.empty()) {
      reject("empty essay id");
      continue;
    }
    const std::string& text = field(c_text);

    auto it = essay_index.find(id);
    if (it == essay_index.end()) {
      if (text.empty()) {
        reject("empty essay text");
        continue;
      }
      Essay e;
      e.id = id;
      e.text = text;
      try {
        essay_cp_len[id] = utf8::length(text);
      } catch (const utf8::DecodeError& err) {
        reject(std::string("invalid UTF-8 in text: ") + err.what());
        continue;
      }
      if (auto sv = parse_int(field(c_score))) e.score = *sv;
      if (c_grade) e.grade = parse_grade(field(*c_grade));
      if (c_split) e.split = trim(field(*c_split));
      if (c_srcdep) e.source_dependent = parse_flag(field(*c_srcdep));
      if (c_gender) e.demographics.gender = parse_gender(field(*c_gender));
      if (c_race) e.demographics.race_ethnicity = parse_race(field(*c_race));
      if (c_ell) e.demographics.ell = parse_flag(field(*c_ell));
      if (c_econ)
        e.demographics.disadvantaged_economically = parse_flag(field(*c_econ));
      if (c_dis)
        e.demographics.identified_disability = parse_flag(field(*c_dis));
      essay_index[id] = corpus.essays.size();
      corpus.essays.push_back(std::move(e));
      corpus.gold_spans[id];  // essays may legitimately have no spans
    }

    const std::string type_raw = trim(field(c_type));
    if (type_raw.empty()) {
      // essay-only row (no discourse element)
      rep.accepted_rows++;
      continue;
    }
    auto label = component_label_from_string(type_raw);
    if (!label) {
      reject("unknown discourse type: " + type_raw);
      continue;
    }
    auto start = parse_offset(field(c_start));
    auto end = parse_offset(field(c_end));
    if (!start || !end) {
      reject("unparseable discourse offsets");
      continue;
    }
    if (*end <= *start) {
      reject("discourse end <= start");
      continue;
    }
    const long len = static_cast<long>(essay_cp_len[id]);
    long s = *start, t = *end;
    if (s < 0 || t > len) {
      s = std::clamp(s, 0L, len);
      t = std::clamp(t, 0L, len);
      rep.clipped_spans++;
      if (t <= s) {
        reject("span entirely outside text bounds");
        continue;
      }
    }
    corpus.gold_spans[id].push_back(
        {id, static_cast<std::size_t>(s), static_cast<std::size_t>(t), *label});
    rep.accepted_rows++;
  }

  for (auto& [id, spans] : corpus.gold_spans) {
    std::stable_sort(spans.begin(), spans.end(),
                     [](const ComponentSpan& a, const ComponentSpan& b) {
                       return a.start < b.start ||
                              (a.start == b.start && a.end < b.end);
                     });
  }
  return corpus;
}

std::vector<csv::Row> serialize_corpus(const Corpus& c,
                                       const ColumnMapping& schema) {
  std::vector<csv::Row> rows;
  rows.push_back({schema.id, schema.text, schema.discourse_type,
                  schema.discourse_start, schema.discourse_end, schema.score});
  for (const auto& e : c.essays) {
    const std::string score = e.score ? std::to_string(*e.score) : "";
    auto it = c.gold_spans.find(e.id);
    if (it == c.gold_spans.end() || it->second.empty()) {
      rows.push_back({e.id, e.text, "", "", "", score});
      continue;
    }
    for (const auto& s : it->second) {
      rows.push_back({e.id, e.text, std::string(to_string(s.label)),
                      std::to_string(s.start), std::to_string(s.end), score});
    }
  }
  return rows;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::OverlappingGold: return "OverlappingGold";
    case ViolationKind::OutOfBounds: return "OutOfBounds";
    case ViolationKind::ScoreOutOfRange: return "ScoreOutOfRange";
  }
  return "?";
}

ValidationReport validate_corpus(const Corpus& c) {
  ValidationReport r;
  r.essay_count = c.essays.size();
  std::size_t total_tokens = 0;
  for (const auto& e : c.essays) {
    total_tokens += whitespace_token_count(e.text);
    if (!e.split.empty()) r.split_counts[e.split]++;
    if (e.score) {
      r.score_histogram[*e.score]++;
      if (*e.score < 1 || *e.score > 6)
        r.violations.push_back({e.id, ViolationKind::ScoreOutOfRange,
                                "score " + std::to_string(*e.score)});
    }
    const std::size_t len = utf8::length(e.text);
    auto it = c.gold_spans.find(e.id);
    if (it == c.gold_spans.end()) continue;
    const auto& spans = it->second;
    r.span_count += spans.size();
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].end > len || spans[i].start >= spans[i].end)
        r.violations.push_back(
            {e.id, ViolationKind::OutOfBounds,
             "span [" + std::to_string(spans[i].start) + "," +
                 std::to_string(spans[i].end) + ") vs len " +
                 std::to_string(len)});
      if (i > 0 && spans[i].start < spans[i - 1].end)
        r.violations.push_back(
            {e.id, ViolationKind::OverlappingGold,
             "spans " + std::to_string(i - 1) + " and " + std::to_string(i)});
    }
  }
  r.mean_token_length =
      c.essays.empty() ? 0.0
                       : static_cast<double>(total_tokens) / c.essays.size();
  return r;
}

std::map<int, double> ValidationReport::score_percentages() const {
  std::map<int, double> out;
  std::size_t total = 0;
  for (const auto& [s, n] : score_histogram) total += n;
  if (total == 0) return out;
  for (const auto& [s, n] : score_histogram)
    out[s] = 100.0 * static_cast<double>(n) / static_cast<double>(total);
  return out;
}

std::size_t repair_overlaps_clip_left(Corpus& c) {
  std::size_t repaired = 0;
  for (auto& [id, spans] : c.gold_spans) {
    std::vector<ComponentSpan> out;
    for (auto& s : spans) {
      if (!out.empty() && s.start < out.back().end) {
        s.start = out.back().end;
        ++repaired;
        if (s.start >= s.end) continue;  // swallowed entirely
      }
      out.push_back(s);
    }
    spans = std::move(out);
  }
  return repaired;
}

void write_validation_text(std::ostream& out, const ValidationReport& r) {
  out << "essays: " << r.essay_count << "\n";
  out << "gold spans: " << r.span_count << "\n";
  for (const auto& [split, n] : r.split_counts)
    out << "split " << split << ": " << n << "\n";
  out << "mean length (whitespace tokens): ";
  {
    std::ostringstream tmp;
    tmp.precision(1);
    tmp << std::fixed << r.mean_token_length;
    out << tmp.str() << "\n";
  }
  auto pct = r.score_percentages();
  if (!pct.empty()) {
    out << "score distribution:";
    for (const auto& [s, p] : pct) {
      std::ostringstream tmp;
      tmp.precision(1);
      tmp << std::fixed << p;
      out << " " << s << ":" << tmp.str() << "%";
    }
    out << "\n";
  }
  out << "violations: " << r.violations.size() << "\n";
  for (const auto& v : r.violations)
    out << "  " << v.essay_id << " " << to_string(v.kind) << " " << v.detail
        << "\n";
}

std::string validation_to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["essay_count"] = r.essay_count;
  j["span_count"] = r.span_count;
  j["mean_token_length"] = r.mean_token_length;
  j["split_counts"] = nlohmann::json::object();
  for (const auto& [split, n] : r.split_counts) j["split_counts"][split] = n;
  j["score_histogram"] = nlohmann::json::object();
  for (const auto& [s, n] : r.score_histogram)
    j["score_histogram"][std::to_string(s)] = n;
  j["score_percentages"] = nlohmann::json::object();
  for (const auto& [s, p] : r.score_percentages())
    j["score_percentages"][std::to_string(s)] = p;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back({{"essay_id", v.essay_id},
                               {"kind", std::string(to_string(v.kind))},
                               {"detail", v.detail}});
  return j.dump(2);
}

}  // namespace essaymark
