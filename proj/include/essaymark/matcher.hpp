#ifndef ESSAYMARK_MATCHER_HPP
#define ESSAYMARK_MATCHER_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "essaymark/types.hpp"

namespace essaymark {

// Word-index view of a component span: the set of whitespace-token indices
// it overlaps. Indices are sorted and unique.
struct WordSpan {
  std::vector<int> indices;
  ComponentLabel label = ComponentLabel::Lead;

  bool operator==(const WordSpan&) const = default;
};

// Char ranges of the whitespace tokens of text, in Unicode scalar offsets.
std::vector<std::pair<std::size_t, std::size_t>> token_ranges(
    const std::string& text);

// Maps each span to the indices of tokens intersecting its char range.
// Spans touching no token (inter-token whitespace only) are dropped.
std::vector<WordSpan> to_word_spans(const std::string& text,
                                    const std::vector<ComponentSpan>& spans);

// Char-offset view: every char offset in [start,end) as an index. Same
// matching machinery, different overlap granularity.
std::vector<WordSpan> to_char_spans(const std::vector<ComponentSpan>& spans);

struct MatchPair {
  int gold = -1;
  int pred = -1;
  std::size_t intersection = 0;
  double overlap_gold = 0.0;  // |g∩p| / |g|
  double overlap_pred = 0.0;  // |g∩p| / |p|
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_gold;
  std::vector<int> unmatched_pred;
};

// Both directions must strictly exceed one half.
bool matchable(const WordSpan& gold, const WordSpan& pred);
std::size_t intersection_size(const WordSpan& a, const WordSpan& b);

// Greedy one-to-one matching: candidate pairs in descending intersection
// size, ties by lower gold then lower pred index.
MatchResult match_spans(const std::vector<WordSpan>& gold,
                        const std::vector<WordSpan>& pred);

// Exact maximum-total-intersection one-to-one matching over matchable pairs.
// Intended for small instances (pred count <= ~20).
MatchResult match_spans_optimal(const std::vector<WordSpan>& gold,
                                const std::vector<WordSpan>& pred);

struct LabelCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct MatchTally {
  std::map<ComponentLabel, LabelCounts> per_label;

  MatchTally& operator+=(const MatchTally& other);
};

struct TallyOptions {
  // Count predictions with no matching gold span as false positives under
  // their predicted label.
  bool fp_unmatched_pred = true;
};

MatchTally tally(const MatchResult& result, const std::vector<WordSpan>& gold,
                 const std::vector<WordSpan>& pred, TallyOptions opts = {});

// 2TP / (2TP + FP + FN); 1.0 when all counts are zero.
double f1_from_counts(long tp, long fp, long fn);

// Unweighted mean of per-label F1 over the seven component labels.
double macro_f1(const MatchTally& t);

}  // namespace essaymark

#endif
