#include "essaymark/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace essaymark {

void ScorePairs::validate() const {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("score vectors differ in length");
  if (y_true.empty()) throw std::invalid_argument("empty score vectors");
  if (scale_max < 2) throw std::invalid_argument("scale_max must be >= 2");
  for (int v : y_true)
    if (v < 1 || v > scale_max)
      throw std::invalid_argument("true score outside [1, N]");
  for (int v : y_pred)
    if (v < 1 || v > scale_max)
      throw std::invalid_argument("predicted score outside [1, N]");
}

AgreementMatrix build_matrices(const ScorePairs& s) {
  s.validate();
  const int N = s.scale_max;
  const std::size_t n = s.size();
  AgreementMatrix m;
  m.observed.assign(N, std::vector<long>(N, 0));
  m.expected.assign(N, std::vector<double>(N, 0.0));
  m.weights.assign(N, std::vector<double>(N, 0.0));

  std::vector<long> row(N, 0), col(N, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const int i = s.y_true[k] - 1, j = s.y_pred[k] - 1;
    m.observed[i][j]++;
    row[i]++;
    col[j]++;
  }
  const double denom = static_cast<double>(N - 1) * (N - 1);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      m.expected[i][j] = static_cast<double>(row[i]) *
                         static_cast<double>(col[j]) /
                         static_cast<double>(n);
      m.weights[i][j] = static_cast<double>((i - j) * (i - j)) / denom;
    }
  }
  return m;
}

double qwk(const ScorePairs& s) {
  const AgreementMatrix m = build_matrices(s);
  const int N = s.scale_max;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      num += m.weights[i][j] * static_cast<double>(m.observed[i][j]);
      den += m.weights[i][j] * m.expected[i][j];
    }
  }
  if (den == 0.0) throw DegenerateDistribution();
  return 1.0 - num / den;
}

double exact_agreement(const ScorePairs& s) {
  s.validate();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.y_true[i] == s.y_pred[i]) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(s.size());
}

namespace {

double mean(const std::vector<int>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double variance(const std::vector<int>& v, bool sample) {
  const double m = mean(v);
  double ss = 0.0;
  for (int x : v) ss += (x - m) * (x - m);
  const double denom =
      sample ? static_cast<double>(v.size()) - 1.0
             : static_cast<double>(v.size());
  return ss / denom;
}

}  // namespace

double smd(const ScorePairs& s, SmdOptions opts) {
  s.validate();
  if (s.size() < 2) throw std::invalid_argument("smd needs n >= 2");
  const double vp = variance(s.y_pred, opts.sample_variance);
  const double vt = variance(s.y_true, opts.sample_variance);
  if (vp == 0.0 && vt == 0.0) throw ZeroVariance();
  return (mean(s.y_pred) - mean(s.y_true)) / std::sqrt((vp + vt) / 2.0);
}

BiasReport subgroup_bias(const std::vector<ScoredRecord>& records,
                         BiasOptions opts) {
  using Selector = bool (*)(const Demographics&);
  struct Group {
    const char* key;
    Selector select;
  };
  static constexpr Group kGroups[] = {
      {"Female", [](const Demographics& d) { return d.gender == Gender::Female; }},
      {"WC", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::WC; }},
      {"HL", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::HL; }},
      {"BA", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::BA; }},
      {"AP", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::AP; }},
      {"Nat", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::Nat; }},
      {"Mix", [](const Demographics& d) { return d.race_ethnicity == RaceEthnicity::Mix; }},
      {"ELL", [](const Demographics& d) { return d.ell == true; }},
      {"DE", [](const Demographics& d) { return d.disadvantaged_economically == true; }},
      {"ID", [](const Demographics& d) { return d.identified_disability == true; }},
  };

  BiasReport report;
  report.small_n_threshold = opts.small_n_threshold;
  for (const auto& g : kGroups) {
    ScorePairs s;
    s.scale_max = opts.scale_max;
    for (const auto& r : records) {
      if (g.select(r.demographics)) {
        s.y_true.push_back(r.y_true);
        s.y_pred.push_back(r.y_pred);
      }
    }
    if (s.y_true.empty()) {
      report.notes.push_back(std::string(g.key) + ": no records, row omitted");
      continue;
    }
    BiasRow row;
    row.key = g.key;
    row.n = s.y_true.size();
    row.flagged_small_n = row.n < opts.small_n_threshold;
    if (s.y_true.size() < 2) {
      report.notes.push_back(std::string(g.key) +
                             ": fewer than 2 records, row omitted");
      continue;
    }
    try {
      row.smd = smd(s, opts.smd);
    } catch (const ZeroVariance&) {
      report.notes.push_back(std::string(g.key) +
                             ": zero variance, row omitted");
      continue;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace essaymark
