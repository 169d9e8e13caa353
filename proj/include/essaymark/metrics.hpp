#ifndef ESSAYMARK_METRICS_HPP
#define ESSAYMARK_METRICS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "essaymark/types.hpp"

namespace essaymark {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDistribution : MetricError {
  DegenerateDistribution()
      : MetricError("both raters constant: expected disagreement is zero") {}
};
struct ZeroVariance : MetricError {
  ZeroVariance() : MetricError("both score vectors have zero variance") {}
};

// Paired integer scores on a fixed 1..scale_max scale. The scale comes from
// configuration, never from the data.
struct ScorePairs {
  std::vector<int> y_true;
  std::vector<int> y_pred;
  int scale_max = 6;

  void validate() const;  // throws std::invalid_argument
  std::size_t size() const { return y_true.size(); }
};

struct AgreementMatrix {
  std::vector<std::vector<long>> observed;    // N x N counts
  std::vector<std::vector<double>> expected;  // row_i * col_j / n
  std::vector<std::vector<double>> weights;   // (i-j)^2 / (N-1)^2
};

AgreementMatrix build_matrices(const ScorePairs& s);

// 1 - sum(W*O) / sum(W*E), in [-1, 1]. Throws DegenerateDistribution when
// both raters are constant.
double qwk(const ScorePairs& s);

// Percentage of identical pairs, in [0, 100].
double exact_agreement(const ScorePairs& s);

struct SmdOptions {
  bool sample_variance = true;  // n-1 denominator; false = population
};

// (mean pred - mean true) / sqrt((var pred + var true) / 2).
double smd(const ScorePairs& s, SmdOptions opts = {});

struct ScoredRecord {
  int y_true = 0;
  int y_pred = 0;
  Demographics demographics;
};

struct BiasRow {
  std::string key;  // Female, WC, HL, BA, AP, Nat, Mix, ELL, DE, ID
  std::size_t n = 0;
  double smd = 0.0;
  bool flagged_small_n = false;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  std::vector<std::string> notes;  // e.g. omitted empty subgroups
  std::size_t small_n_threshold = 50;
};

struct BiasOptions {
  std::size_t small_n_threshold = 50;
  int scale_max = 6;
  SmdOptions smd;
};

// SMD restricted to each demographic subgroup, reported in a fixed row
// order. Empty subgroups are omitted with a note; small ones are flagged.
BiasReport subgroup_bias(const std::vector<ScoredRecord>& records,
                         BiasOptions opts = {});

}  // namespace essaymark

#endif
