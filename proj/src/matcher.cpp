#include "essaymark/matcher.hpp"

#include <algorithm>
#include <cctype>

#include "essaymark/utf8.hpp"

namespace essaymark {

std::vector<std::pair<std::size_t, std::size_t>> token_ranges(
    const std::string& text) {
  const std::u32string t = utf8::decode(text);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] < 128 && std::isspace(static_cast<int>(t[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < t.size() &&
           !(t[i] < 128 && std::isspace(static_cast<int>(t[i]))))
      ++i;
    out.emplace_back(start, i);
  }
  return out;
}

std::vector<WordSpan> to_word_spans(const std::string& text,
                                    const std::vector<ComponentSpan>& spans) {
  const auto tokens = token_ranges(text);
  std::vector<WordSpan> out;
  for (const auto& s : spans) {
    WordSpan w;
    w.label = s.label;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].first < s.end && s.start < tokens[i].second)
        w.indices.push_back(static_cast<int>(i));
    }
    if (!w.indices.empty()) out.push_back(std::move(w));
  }
  return out;
}

std::vector<WordSpan> to_char_spans(const std::vector<ComponentSpan>& spans) {
  std::vector<WordSpan> out;
  for (const auto& s : spans) {
    WordSpan w;
    w.label = s.label;
    for (std::size_t i = s.start; i < s.end; ++i)
      w.indices.push_back(static_cast<int>(i));
    if (!w.indices.empty()) out.push_back(std::move(w));
  }
  return out;
}

std::size_t intersection_size(const WordSpan& a, const WordSpan& b) {
  std::size_t n = 0;
  auto it = b.indices.begin();
  for (int x : a.indices) {
    it = std::lower_bound(it, b.indices.end(), x);
    if (it == b.indices.end()) break;
    if (*it == x) ++n;
  }
  return n;
}

bool matchable(const WordSpan& gold, const WordSpan& pred) {
  const std::size_t inter = intersection_size(gold, pred);
  return 2 * inter > gold.indices.size() && 2 * inter > pred.indices.size();
}

namespace {

struct Candidate {
  int g, p;
  std::size_t inter;
};

std::vector<Candidate> candidates(const std::vector<WordSpan>& gold,
                                  const std::vector<WordSpan>& pred) {
  std::vector<Candidate> cands;
  for (int g = 0; g < static_cast<int>(gold.size()); ++g) {
    for (int p = 0; p < static_cast<int>(pred.size()); ++p) {
      std::size_t inter = intersection_size(gold[g], pred[p]);
      if (2 * inter > gold[g].indices.size() &&
          2 * inter > pred[p].indices.size())
        cands.push_back({g, p, inter});
    }
  }
  return cands;
}

MatchResult build_result(const std::vector<WordSpan>& gold,
                         const std::vector<WordSpan>& pred,
                         const std::vector<std::pair<int, int>>& assignment) {
  MatchResult r;
  std::vector<bool> gused(gold.size(), false), pused(pred.size(), false);
  for (auto [g, p] : assignment) {
    std::size_t inter = intersection_size(gold[g], pred[p]);
    r.pairs.push_back({g, p, inter,
                       static_cast<double>(inter) / gold[g].indices.size(),
                       static_cast<double>(inter) / pred[p].indices.size()});
    gused[g] = true;
    pused[p] = true;
  }
  std::sort(r.pairs.begin(), r.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) {
              return a.gold < b.gold;
            });
  for (int g = 0; g < static_cast<int>(gold.size()); ++g)
    if (!gused[g]) r.unmatched_gold.push_back(g);
  for (int p = 0; p < static_cast<int>(pred.size()); ++p)
    if (!pused[p]) r.unmatched_pred.push_back(p);
  return r;
}

}  // namespace

MatchResult match_spans(const std::vector<WordSpan>& gold,
                        const std::vector<WordSpan>& pred) {
  auto cands = candidates(gold, pred);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                           const Candidate& b) {
    if (a.inter != b.inter) return a.inter > b.inter;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });
  std::vector<bool> gused(gold.size(), false), pused(pred.size(), false);
  std::vector<std::pair<int, int>> assignment;
  for (const auto& c : cands) {
    if (gused[c.g] || pused[c.p]) continue;
    gused[c.g] = true;
    pused[c.p] = true;
    assignment.emplace_back(c.g, c.p);
  }
  return build_result(gold, pred, assignment);
}

MatchResult match_spans_optimal(const std::vector<WordSpan>& gold,
                                const std::vector<WordSpan>& pred) {
  auto cands = candidates(gold, pred);
  // adjacency: per gold index, the matchable preds with weights
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(gold.size());
  for (const auto& c : cands) adj[c.g].emplace_back(c.p, c.inter);

  // DP over gold index x bitmask of used preds, maximizing total overlap.
  // Prefers more matched pairs at equal weight, then lexicographically
  // earliest assignment, so the result is deterministic.
  const int np = static_cast<int>(pred.size());
  if (np > 20) throw std::invalid_argument("optimal matcher limited to <=20 predictions");

  struct Best {
    long weight = -1;
    int matched = 0;
    std::vector<std::pair<int, int>> assignment;
  };

  Best best;
  std::vector<std::pair<int, int>> current;
  long cur_weight = 0;

  // branch and recurse; instance sizes are small by contract
  auto dfs = [&](auto&& self, std::size_t g, unsigned mask) -> void {
    if (g == gold.size()) {
      if (cur_weight > best.weight ||
          (cur_weight == best.weight &&
           (static_cast<int>(current.size()) > best.matched ||
            (static_cast<int>(current.size()) == best.matched &&
             current < best.assignment)))) {
        best.weight = cur_weight;
        best.matched = static_cast<int>(current.size());
        best.assignment = current;
      }
      return;
    }
    for (const auto& [p, w] : adj[g]) {
      if (mask & (1u << p)) continue;
      current.emplace_back(static_cast<int>(g), p);
      cur_weight += static_cast<long>(w);
      self(self, g + 1, mask | (1u << p));
      cur_weight -= static_cast<long>(w);
      current.pop_back();
    }
    self(self, g + 1, mask);  // leave this gold unmatched
  };
  dfs(dfs, 0, 0u);

  return build_result(gold, pred, best.assignment);
}

MatchTally& MatchTally::operator+=(const MatchTally& other) {
  for (const auto& [label, counts] : other.per_label) {
    auto& mine = per_label[label];
    mine.tp += counts.tp;
    mine.fp += counts.fp;
    mine.fn += counts.fn;
  }
  return *this;
}

MatchTally tally(const MatchResult& result, const std::vector<WordSpan>& gold,
                 const std::vector<WordSpan>& pred, TallyOptions opts) {
  MatchTally t;
  for (ComponentLabel l : kComponentLabels) t.per_label[l];
  for (const auto& pair : result.pairs) {
    const ComponentLabel gl = gold[pair.gold].label;
    const ComponentLabel pl = pred[pair.pred].label;
    if (gl == pl) {
      t.per_label[gl].tp++;
    } else {
      t.per_label[pl].fp++;
      t.per_label[gl].fn++;
    }
  }
  for (int g : result.unmatched_gold) t.per_label[gold[g].label].fn++;
  if (opts.fp_unmatched_pred)
    for (int p : result.unmatched_pred) t.per_label[pred[p].label].fp++;
  return t;
}

double f1_from_counts(long tp, long fp, long fn) {
  if (tp == 0 && fp == 0 && fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) /
         static_cast<double>(2 * tp + fp + fn);
}

double macro_f1(const MatchTally& t) {
  double sum = 0.0;
  for (ComponentLabel l : kComponentLabels) {
    auto it = t.per_label.find(l);
    const LabelCounts c = it == t.per_label.end() ? LabelCounts{} : it->second;
    sum += f1_from_counts(c.tp, c.fp, c.fn);
  }
  return sum / static_cast<double>(kComponentLabels.size());
}

}  // namespace essaymark
