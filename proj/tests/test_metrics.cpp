#include <doctest.h>

#include <cmath>
#include <random>

#include "essaymark/metrics.hpp"

using namespace essaymark;

namespace {

// Naive quadratic-kappa oracle straight from the definition.
double oracle_qwk(const std::vector<int>& yt, const std::vector<int>& yp,
                  int scale_max) {
  const int N = scale_max;
  const double n = static_cast<double>(yt.size());
  std::vector<std::vector<double>> O(N, std::vector<double>(N, 0.0));
  for (std::size_t k = 0; k < yt.size(); ++k) O[yt[k] - 1][yp[k] - 1] += 1;
  std::vector<double> row(N, 0.0), col(N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      row[i] += O[i][j];
      col[j] += O[i][j];
    }
  double num = 0, den = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double w = double(i - j) * (i - j) / (double(N - 1) * (N - 1));
      num += w * O[i][j];
      den += w * row[i] * col[j] / n;
    }
  return 1.0 - num / den;
}

ScorePairs pairs(std::vector<int> t, std::vector<int> p, int scale = 6) {
  return ScorePairs{std::move(t), std::move(p), scale};
}

}  // namespace

TEST_CASE("validate rejects bad shapes and out-of-scale values") {
  CHECK_THROWS_AS(pairs({1, 2}, {1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pairs({}, {}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pairs({0, 2}, {1, 2}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(pairs({1, 7}, {1, 2}).validate(), std::invalid_argument);
  CHECK_NOTHROW(pairs({1, 6}, {6, 1}).validate());
}

TEST_CASE("worked kappa example") {
  CHECK(qwk(pairs({1, 2, 3}, {1, 2, 2})) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("perfect agreement gives kappa 1") {
  CHECK(qwk(pairs({1, 3, 5, 2}, {1, 3, 5, 2})) == doctest::Approx(1.0));
}

TEST_CASE("constant raters are degenerate") {
  CHECK_THROWS_AS(qwk(pairs({3, 3, 3}, {3, 3, 3})), DegenerateDistribution);
  // one constant rater is fine
  CHECK_NOTHROW(qwk(pairs({3, 3, 3}, {2, 3, 4})));
}

TEST_CASE("kappa matches the naive oracle on random data") {
  std::mt19937 rng(6061);
  std::uniform_int_distribution<int> score(1, 6);
  std::uniform_int_distribution<int> len(2, 200);
  for (int iter = 0; iter < 200; ++iter) {
    int n = len(rng);
    std::vector<int> yt(n), yp(n);
    for (int k = 0; k < n; ++k) {
      yt[k] = score(rng);
      yp[k] = score(rng);
    }
    double got;
    try {
      got = qwk(pairs(yt, yp));
    } catch (const DegenerateDistribution&) {
      continue;
    }
    CAPTURE(iter);
    CHECK(got == doctest::Approx(oracle_qwk(yt, yp, 6)).epsilon(1e-9));
    CHECK(got <= 1.0 + 1e-12);
    CHECK(got >= -1.0 - 1e-12);
  }
}

TEST_CASE("weights use the configured scale, not the observed range") {
  // same data, different scale -> different weight matrix normalizer but
  // identical kappa only if ratios survive; verify against the oracle
  auto yt = std::vector<int>{1, 2, 3, 3};
  auto yp = std::vector<int>{2, 2, 3, 1};
  CHECK(qwk(pairs(yt, yp, 6)) == doctest::Approx(oracle_qwk(yt, yp, 6)));
  CHECK(qwk(pairs(yt, yp, 4)) == doctest::Approx(oracle_qwk(yt, yp, 4)));
}

TEST_CASE("matrix invariants") {
  auto m = build_matrices(pairs({1, 2, 6}, {2, 2, 5}));
  REQUIRE(m.observed.size() == 6);
  long total = 0;
  double etotal = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      total += m.observed[i][j];
      etotal += m.expected[i][j];
      CHECK(m.weights[i][j] == doctest::Approx((i - j) * (i - j) / 25.0));
    }
  CHECK(total == 3);
  CHECK(etotal == doctest::Approx(3.0));
  CHECK(m.observed[0][1] == 1);
  CHECK(m.observed[5][4] == 1);
}

TEST_CASE("exact agreement is a percentage") {
  CHECK(exact_agreement(pairs({1, 2, 3, 4}, {1, 2, 3, 3})) ==
        doctest::Approx(75.0));
  CHECK(exact_agreement(pairs({2, 2}, {2, 2})) == doctest::Approx(100.0));
}

TEST_CASE("smd location shift of one scale point") {
  // {1,2,3} has unit sample variance; prediction = truth + 1 -> smd exactly 1
  CHECK(smd(pairs({1, 2, 3}, {2, 3, 4})) == doctest::Approx(1.0));
  // symmetric: swapping direction flips the sign
  CHECK(smd(pairs({2, 3, 4}, {1, 2, 3})) == doctest::Approx(-1.0));
}

TEST_CASE("smd zero for identical distributions") {
  CHECK(smd(pairs({1, 2, 3}, {3, 2, 1})) == doctest::Approx(0.0));
}

TEST_CASE("smd variance flavors") {
  auto s = pairs({1, 2, 3, 4}, {1, 2, 3, 6});
  double sample = smd(s);
  double population = smd(s, SmdOptions{.sample_variance = false});
  // population variance is smaller, so the standardized difference grows
  CHECK(std::abs(population) > std::abs(sample));
  CHECK(sample == doctest::Approx(0.5 / std::sqrt(
                      (5.0 / 3.0 + 14.0 / 3.0) / 2.0)));
}

TEST_CASE("smd throws when both sides are constant") {
  CHECK_THROWS_AS(smd(pairs({2, 2, 2}, {3, 3, 3})), ZeroVariance);
}

TEST_CASE("subgroup bias keeps a fixed row order") {
  std::vector<ScoredRecord> recs;
  auto add = [&](int yt, int yp, auto setter) {
    ScoredRecord r;
    r.y_true = yt;
    r.y_pred = yp;
    setter(r.demographics);
    recs.push_back(r);
  };
  for (int i = 0; i < 3; ++i) {
    add(2 + i, 3 + i, [](Demographics& d) { d.ell = true; });
    add(2 + i, 2 + i, [](Demographics& d) { d.gender = Gender::Female; });
    add(1 + i, 2 + i,
        [](Demographics& d) { d.race_ethnicity = RaceEthnicity::BA; });
  }
  auto report = subgroup_bias(recs);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].key == "Female");
  CHECK(report.rows[1].key == "BA");
  CHECK(report.rows[2].key == "ELL");
  CHECK(report.rows[2].smd == doctest::Approx(1.0));
  for (const auto& r : report.rows) CHECK(r.flagged_small_n);  // n=3 < 50
  CHECK(!report.notes.empty());  // the other subgroups are noted as omitted
}

TEST_CASE("subgroup bias is deterministic") {
  std::vector<ScoredRecord> recs;
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> score(1, 6);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 120; ++i) {
    ScoredRecord r;
    r.y_true = score(rng);
    r.y_pred = score(rng);
    if (coin(rng)) r.demographics.gender = Gender::Female;
    if (coin(rng)) r.demographics.ell = coin(rng) == 1;
    r.demographics.race_ethnicity =
        static_cast<RaceEthnicity>(i % 6);
    recs.push_back(r);
  }
  auto a = subgroup_bias(recs);
  auto b = subgroup_bias(recs);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].key == b.rows[i].key);
    CHECK(a.rows[i].smd == b.rows[i].smd);
    CHECK(a.rows[i].n == b.rows[i].n);
  }
}

TEST_CASE("subgroups above the threshold are not flagged") {
  std::vector<ScoredRecord> recs;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> score(1, 6);
  for (int i = 0; i < 60; ++i) {
    ScoredRecord r;
    r.y_true = score(rng);
    r.y_pred = score(rng);
    r.demographics.gender = Gender::Female;
    recs.push_back(r);
  }
  auto report = subgroup_bias(recs);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].n == 60);
  CHECK(!report.rows[0].flagged_small_n);
}
