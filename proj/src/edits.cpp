#include "essaymark/edits.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "essaymark/utf8.hpp"

namespace essaymark {

namespace {

bool is_space_cp(char32_t c) {
  return c < 128 && std::isspace(static_cast<int>(c));
}

bool is_punct_cp(char32_t c) {
  return c < 128 && std::ispunct(static_cast<int>(c));
}

bool is_alpha_cp(char32_t c) {
  return c < 128 && std::isalpha(static_cast<int>(c));
}

std::string fold_case(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool punct_only(const std::string& s) {
  std::u32string t = utf8::decode(s);
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(), is_punct_cp);
}

bool alpha_only(const std::string& s) {
  std::u32string t = utf8::decode(s);
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(), is_alpha_cp);
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  const std::u32string t = utf8::decode(text);
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](std::size_t s, std::size_t e) {
    out.push_back({utf8::encode(t.substr(s, e - s)), s, e});
  };
  while (i < t.size()) {
    if (is_space_cp(t[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < t.size() && !is_space_cp(t[i])) ++i;
    std::size_t end = i;
    // peel leading punctuation
    std::size_t core_start = start;
    while (core_start < end && is_punct_cp(t[core_start])) {
      push(core_start, core_start + 1);
      ++core_start;
    }
    // find trailing punctuation
    std::size_t core_end = end;
    while (core_end > core_start && is_punct_cp(t[core_end - 1])) --core_end;
    if (core_end > core_start) push(core_start, core_end);
    for (std::size_t k = core_end; k < end; ++k) push(k, k + 1);
  }
  return out;
}

double align_cost(const std::vector<Token>& orig,
                  const std::vector<Token>& corr) {
  const std::size_t n = orig.size(), m = corr.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      double sub;
      if (orig[i - 1].text == corr[j - 1].text)
        sub = 0.0;
      else if (fold_case(orig[i - 1].text) == fold_case(corr[j - 1].text))
        sub = 0.5;
      else
        sub = 1.0;
      cur[j] = std::min({prev[j - 1] + sub, prev[j] + 1.0, cur[j - 1] + 1.0});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

enum class Step { Match, Sub, Ins, Del };

std::string join_tokens(const std::vector<Token>& toks, int begin, int end) {
  std::string out;
  for (int i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += toks[i].text;
  }
  return out;
}

}  // namespace

std::vector<EditOp> align(const std::vector<Token>& orig,
                          const std::vector<Token>& corr) {
  const std::size_t n = orig.size(), m = corr.size();
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<double>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double sub;
      if (orig[i - 1].text == corr[j - 1].text)
        sub = 0.0;
      else if (fold_case(orig[i - 1].text) == fold_case(corr[j - 1].text))
        sub = 0.5;
      else
        sub = 1.0;
      d[i][j] = std::min(
          {d[i - 1][j - 1] + sub, d[i - 1][j] + 1.0, d[i][j - 1] + 1.0});
    }
  }

  // traceback, preferring diagonal, then deletion, then insertion
  std::vector<Step> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      double sub;
      if (orig[i - 1].text == corr[j - 1].text)
        sub = 0.0;
      else if (fold_case(orig[i - 1].text) == fold_case(corr[j - 1].text))
        sub = 0.5;
      else
        sub = 1.0;
      if (d[i][j] == d[i - 1][j - 1] + sub) {
        steps.push_back(sub == 0.0 ? Step::Match : Step::Sub);
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1.0) {
      steps.push_back(Step::Del);
      --i;
      continue;
    }
    steps.push_back(Step::Ins);
    --j;
  }
  std::reverse(steps.begin(), steps.end());

  // merge runs of identical non-match steps
  std::vector<EditOp> edits;
  int oi = 0, ci = 0;
  std::size_t k = 0;
  while (k < steps.size()) {
    Step s = steps[k];
    if (s == Step::Match) {
      ++oi;
      ++ci;
      ++k;
      continue;
    }
    std::size_t run_end = k;
    while (run_end < steps.size() && steps[run_end] == s) ++run_end;
    const int len = static_cast<int>(run_end - k);
    EditOp e;
    switch (s) {
      case Step::Sub:
        e.tag = EditTag::R;
        e.orig_begin = oi;
        e.orig_end = oi + len;
        e.corr_begin = ci;
        e.corr_end = ci + len;
        oi += len;
        ci += len;
        break;
      case Step::Ins:
        e.tag = EditTag::M;
        e.orig_begin = e.orig_end = oi;
        e.corr_begin = ci;
        e.corr_end = ci + len;
        ci += len;
        break;
      case Step::Del:
        e.tag = EditTag::U;
        e.orig_begin = oi;
        e.orig_end = oi + len;
        e.corr_begin = e.corr_end = ci;
        oi += len;
        break;
      case Step::Match:
        break;
    }
    e.orig_text = join_tokens(orig, e.orig_begin, e.orig_end);
    e.corr_text = join_tokens(corr, e.corr_begin, e.corr_end);
    edits.push_back(std::move(e));
    k = run_end;
  }
  return edits;
}

std::vector<std::string> apply_edits(const std::vector<Token>& orig,
                                     const std::vector<EditOp>& edits) {
  std::vector<std::string> out;
  int oi = 0;
  for (const auto& e : edits) {
    for (; oi < e.orig_begin; ++oi) out.push_back(orig[oi].text);
    if (!e.corr_text.empty()) {
      // corr_text tokens were joined by single spaces
      std::size_t pos = 0;
      while (pos < e.corr_text.size()) {
        std::size_t sp = e.corr_text.find(' ', pos);
        if (sp == std::string::npos) sp = e.corr_text.size();
        out.push_back(e.corr_text.substr(pos, sp - pos));
        pos = sp + 1;
      }
    }
    oi = e.orig_end;
  }
  for (; oi < static_cast<int>(orig.size()); ++oi) out.push_back(orig[oi].text);
  return out;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  Lexicon lex;
  std::string word;
  while (std::getline(in, word)) {
    while (!word.empty() && (word.back() == '\r' || word.back() == '\n'))
      word.pop_back();
    if (!word.empty()) lex.words_.insert(fold_case(word));
  }
  return lex;
}

Lexicon Lexicon::from_words(std::vector<std::string> words) {
  Lexicon lex;
  for (auto& w : words) lex.words_.insert(fold_case(w));
  return lex;
}

bool Lexicon::contains(const std::string& word) const {
  return words_.count(fold_case(word)) > 0;
}

ErrorLabel classify_edit(const EditOp& e, const Lexicon& lexicon) {
  // (1) punctuation-only changes, or case-only changes
  bool all_punct = true;
  if (e.tag != EditTag::M && !punct_only(e.orig_text)) all_punct = false;
  if (e.tag != EditTag::U && !punct_only(e.corr_text)) all_punct = false;
  if (all_punct) return ErrorLabel::PunctOrth;
  if (e.tag == EditTag::R && fold_case(e.orig_text) == fold_case(e.corr_text))
    return ErrorLabel::PunctOrth;

  // (2) single-token non-word replacement close to its correction
  if (e.tag == EditTag::R && e.orig_end - e.orig_begin == 1 &&
      e.corr_end - e.corr_begin == 1 && alpha_only(e.orig_text) &&
      !lexicon.contains(e.orig_text) &&
      char_similarity(e.orig_text, e.corr_text) >= 0.5)
    return ErrorLabel::Spelling;

  return ErrorLabel::Grammar;
}

std::vector<EditOp> classify_edits(std::vector<EditOp> edits,
                                   const Lexicon& lexicon) {
  for (auto& e : edits) e.label = classify_edit(e, lexicon);
  return edits;
}

std::vector<ErrorSpan> edits_to_spans(const std::vector<EditOp>& edits,
                                      const std::vector<Token>& orig_tokens,
                                      std::size_t text_length,
                                      const std::string& essay_id) {
  std::vector<ErrorSpan> out;
  for (const auto& e : edits) {
    if (e.tag == EditTag::M) {
      const std::size_t at = e.orig_begin < static_cast<int>(orig_tokens.size())
                                 ? orig_tokens[e.orig_begin].start
                                 : text_length;
      out.push_back({essay_id, at, at, e.label});
    } else {
      const std::size_t s = orig_tokens[e.orig_begin].start;
      const std::size_t t = orig_tokens[e.orig_end - 1].end;
      out.push_back({essay_id, s, t, e.label});
    }
  }
  return out;
}

std::vector<Sentence> sentence_split(const std::string& text) {
  const std::u32string t = utf8::decode(text);
  std::vector<Sentence> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < t.size()) {
    char32_t c = t[i];
    if (c == U'.' || c == U'!' || c == U'?') {
      std::size_t j = i + 1;
      while (j < t.size() && (t[j] == U'.' || t[j] == U'!' || t[j] == U'?'))
        ++j;
      std::size_t ws = j;
      while (ws < t.size() && is_space_cp(t[ws])) ++ws;
      const bool at_end = ws >= t.size();
      const bool upper_next =
          ws > j && ws < t.size() && t[ws] < 128 &&
          std::isupper(static_cast<int>(t[ws]));
      if (at_end || upper_next) {
        out.push_back({utf8::encode(t.substr(start, ws - start)), start, ws});
        start = ws;
        i = ws;
        continue;
      }
      i = j;
      continue;
    }
    ++i;
  }
  if (start < t.size())
    out.push_back({utf8::encode(t.substr(start)), start, t.size()});
  if (out.empty() && !t.empty())
    out.push_back({text, 0, t.size()});
  return out;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::u32string x = utf8::decode(a), y = utf8::decode(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double char_similarity(const std::string& a, const std::string& b) {
  const std::size_t la = utf8::length(a), lb = utf8::length(b);
  const std::size_t mx = std::max(la, lb);
  if (mx == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(mx);
}

std::string_view to_string(EditTag tag) {
  switch (tag) {
    case EditTag::R: return "R";
    case EditTag::M: return "M";
    case EditTag::U: return "U";
  }
  return "?";
}

}  // namespace essaymark
