#ifndef ESSAYMARK_CORPUS_HPP
#define ESSAYMARK_CORPUS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "essaymark/csv.hpp"
#include "essaymark/types.hpp"

namespace essaymark {

// Column mapping from CSV headers to corpus fields. Defaults match the
// PERSUADE 2.0 release. Optional columns may be absent from the file; the
// mandatory five must be present.
struct ColumnMapping {
  // mandatory
  std::string id = "essay_id";
  std::string text = "full_text";
  std::string discourse_type = "discourse_type";
  std::string discourse_start = "discourse_start";
  std::string discourse_end = "discourse_end";
  std::string score = "holistic_essay_score";
  // optional
  std::string grade = "grade_level";
  std::string split = "competition_set";
  std::string source_dependent = "source_dependent";
  std::string gender = "gender";
  std::string race_ethnicity = "race_ethnicity";
  std::string ell = "ell_status";
  std::string economically_disadvantaged = "economically_disadvantaged";
  std::string identified_disability = "student_disability_status";
};

struct Corpus {
  std::vector<Essay> essays;
  std::map<std::string, std::vector<ComponentSpan>> gold_spans;

  const Essay* find_essay(const std::string& id) const;
};

struct RowError {
  std::size_t row = 0;  // 1-based CSV row, header = 1
  std::string reason;
};

struct LoadReport {
  std::size_t accepted_rows = 0;
  std::size_t clipped_spans = 0;  // offsets clipped to text bounds
  std::vector<RowError> rejected;
};

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FileNotFound : CorpusError {
  explicit FileNotFound(const std::string& path)
      : CorpusError("file not found: " + path) {}
};
struct MissingColumn : CorpusError {
  explicit MissingColumn(const std::string& name)
      : CorpusError("missing column: " + name) {}
};

// One CSV row per discourse element; rows of one essay share id/text/score.
// Rows whose mandatory fields do not parse are rejected and recorded in the
// report; loading continues.
Corpus load_corpus(const std::string& path, const ColumnMapping& schema,
                   LoadReport* report = nullptr);
Corpus load_corpus_rows(const std::vector<csv::Row>& rows,
                        const ColumnMapping& schema,
                        LoadReport* report = nullptr);

// Inverse of load for the accepted rows: one row per gold span (or one row
// for a spanless essay), in corpus order.
std::vector<csv::Row> serialize_corpus(const Corpus& c,
                                       const ColumnMapping& schema);

enum class ViolationKind { OverlappingGold, OutOfBounds, ScoreOutOfRange };

std::string_view to_string(ViolationKind k);

struct Violation {
  std::string essay_id;
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::map<int, std::size_t> score_histogram;
  std::map<std::string, std::size_t> split_counts;
  std::size_t essay_count = 0;
  std::size_t span_count = 0;
  double mean_token_length = 0.0;  // whitespace tokens per essay

  std::map<int, double> score_percentages() const;
};

// Never aborts; reports everything it finds.
ValidationReport validate_corpus(const Corpus& c);

// --repair=clip-left: truncate the later of two overlapping gold spans at the
// earlier one's end; spans emptied by the cut are dropped.
std::size_t repair_overlaps_clip_left(Corpus& c);

void write_validation_text(std::ostream& out, const ValidationReport& r);
std::string validation_to_json(const ValidationReport& r);

}  // namespace essaymark

#endif
