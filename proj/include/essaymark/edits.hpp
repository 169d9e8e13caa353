#ifndef ESSAYMARK_EDITS_HPP
#define ESSAYMARK_EDITS_HPP

#include <string>
#include <unordered_set>
#include <vector>

#include "essaymark/types.hpp"

namespace essaymark {

// A token with its half-open char range (Unicode scalar offsets) in the
// source string.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

// Whitespace split, then leading/trailing punctuation peeled into single-char
// tokens. Offsets make the tokenization lossless against the source.
std::vector<Token> tokenize(const std::string& text);

enum class EditTag { R, M, U };

std::string_view to_string(EditTag tag);

// One aligned edit between original and corrected token streams. Ranges are
// half-open token index ranges; M has an empty orig range, U an empty corr
// range, R both non-empty.
struct EditOp {
  EditTag tag = EditTag::R;
  int orig_begin = 0, orig_end = 0;
  int corr_begin = 0, corr_end = 0;
  std::string orig_text;  // affected orig tokens joined by single spaces
  std::string corr_text;
  ErrorLabel label = ErrorLabel::Grammar;

  bool operator==(const EditOp&) const = default;
};

// Minimum-cost token alignment. Costs: insert/delete 1, substitution 1,
// case-only substitution 0.5, exact match 0. Maximal runs of adjacent
// same-type edits are merged into single ops.
std::vector<EditOp> align(const std::vector<Token>& orig,
                          const std::vector<Token>& corr);

double align_cost(const std::vector<Token>& orig,
                  const std::vector<Token>& corr);

// Applies the edit script, yielding the corrected token texts.
std::vector<std::string> apply_edits(const std::vector<Token>& orig,
                                     const std::vector<EditOp>& edits);

class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon load(const std::string& path);
  static Lexicon from_words(std::vector<std::string> words);

  // Case-insensitive membership.
  bool contains(const std::string& word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Rule cascade: punctuation-only or case-only changes -> PunctOrth;
// single-token replacements of an alphabetic non-word that stays close to
// its correction -> Spelling; everything else -> Grammar.
ErrorLabel classify_edit(const EditOp& e, const Lexicon& lexicon);

std::vector<EditOp> classify_edits(std::vector<EditOp> edits,
                                   const Lexicon& lexicon);

// Char spans on the original text: R/U cover their orig tokens (interior
// whitespace included), M is a zero-width span at the insertion offset.
std::vector<ErrorSpan> edits_to_spans(const std::vector<EditOp>& edits,
                                      const std::vector<Token>& orig_tokens,
                                      std::size_t text_length,
                                      const std::string& essay_id);

struct Sentence {
  std::string text;
  std::size_t start = 0;  // char range in the source, half-open
  std::size_t end = 0;
};

// Heuristic split after . ! ? followed by whitespace and an uppercase letter
// or end of text. Ranges partition the input.
std::vector<Sentence> sentence_split(const std::string& text);

// Edit distance on Unicode scalar values.
std::size_t levenshtein(const std::string& a, const std::string& b);

// 1 - levenshtein / max(len); 1.0 for two empty strings.
double char_similarity(const std::string& a, const std::string& b);

}  // namespace essaymark

#endif
