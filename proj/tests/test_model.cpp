#include "doctest.h"

#include "ictmc/lp.hpp"
#include "ictmc/model.hpp"
#include "support.hpp"

using namespace ictmc;

TEST_SUITE_BEGIN("model");

TEST_CASE("max norm") {
  CHECK(max_norm((Vec(3) << -0.7, 1.7, -1).finished()) == doctest::Approx(1.7));
  CHECK(max_norm(Vec::Ones(3)) == doctest::Approx(1.0));
  CHECK(max_norm(Vec::Zero(4)) == 0.0);
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(Mat::Zero(3, 3)) == 0.0);

  // Minimizing matrix of the three-state example (row-wise absolute sums
  // peak on the middle row).
  Mat q(3, 3);
  q << -0.56, 0.46, 0.1, 0.606667, -0.80667, 0.2, 0.146667, 0.36, -0.50667;
  CHECK(operator_norm(q) == doctest::Approx(1.6133).epsilon(1e-3));

  Mat p(3, 3);
  p << 0.2, 0.3, 0.5, 1.0, 0.0, 0.0, 0.25, 0.25, 0.5;
  CHECK(operator_norm(p) == doctest::Approx(1.0));
}

TEST_CASE("variational and center seminorms") {
  CHECK(variational_seminorm(Vec::Constant(5, 3.7)) == doctest::Approx(0.0));
  CHECK(center_seminorm(Vec::Constant(5, 3.7)) == doctest::Approx(0.0));

  const Vec h1 =
      (Vec(3) << -0.107789092019201, 0.552242160179236, -0.366297008130663).finished();
  CHECK(center_seminorm(h1) == doctest::Approx(0.459269584154950).epsilon(1e-12));
  CHECK(center_seminorm(h1) == doctest::Approx(0.45).epsilon(0.03));

  const Vec e = (Vec(2) << 0, 1).finished();
  CHECK(variational_seminorm(e) == doctest::Approx(1.0));
  CHECK(center_seminorm(e) == doctest::Approx(0.5));

  std::mt19937 rng(7);
  for (int t = 0; t < 100; ++t) {
    const Vec f = test::random_gamble(rng, 5), g = test::random_gamble(rng, 5);
    CHECK(center_seminorm(f) <= max_norm(f) + 1e-15);
    CHECK(variational_seminorm(f + g) <=
          variational_seminorm(f) + variational_seminorm(g) + 1e-12);
  }
}

TEST_CASE("qset norm") {
  // Three-state example: the extreme exit rate sits in row 1.
  CHECK(qset_norm(test::example1()) == doctest::Approx(2 * 137.0 / 150).epsilon(1e-12));
  CHECK(qset_norm(test::example1()) <= 1.83);

  // Interval example: extreme leaving rate 2920 in the last row.
  CHECK(qset_norm(test::example2()) == doctest::Approx(5840.0).epsilon(1e-12));

  // Singleton: equals the operator norm of the only element.
  std::mt19937 rng(11);
  const Mat q = test::random_precise_q(rng, 3);
  Problem single = from_intervals(q, q);
  validate(single);
  CHECK(qset_norm(single) == doctest::Approx(operator_norm(q)).epsilon(1e-9));
}

TEST_CASE("imprecision bound") {
  CHECK(imprecision_bound(test::example1()) == doctest::Approx(2 * qset_norm(test::example1())));
  CHECK(imprecision_bound(test::example1()) <= 3.66);
  std::mt19937 rng(13);
  const Mat q = test::random_precise_q(rng, 4);
  Problem single = from_intervals(q, q);
  validate(single);
  CHECK(imprecision_bound(single) >= 0.0);
}

TEST_CASE("matrix-gamble norm inequality") {
  std::mt19937 rng(17);
  for (int t = 0; t < 100; ++t) {
    const Mat q = test::random_precise_q(rng, 4);
    const Vec f = test::random_gamble(rng, 4, -3, 3);
    CHECK(max_norm(q * f) <= operator_norm(q) * center_seminorm(f) + 1e-12);
  }
}

TEST_CASE("sampled vertices stay inside the qset norm") {
  std::mt19937 rng(19);
  for (int t = 0; t < 20; ++t) {
    const auto rm = test::random_model(rng);
    const Problem& p = rm.problem;
    const double nq = qset_norm(p);
    for (int s = 0; s < 10; ++s) {
      Mat q(p.num_states(), p.num_states());
      const Vec h = test::random_gamble(rng, p.num_states());
      for (int k = 0; k < p.num_states(); ++k) q.row(k) = minimize_row(p, k, h).vertex;
      CHECK(operator_norm(q) <= nq + 1e-9);
    }
  }
}

TEST_CASE("indicator augmentation") {
  // A single generic gamble: all indicators get appended with free own-row
  // bounds and zero off-row bounds.
  Mat f(1, 3);
  f << 1, -1, 0;
  Mat l(1, 3);
  l << -2, -2, -2;
  Problem p = with_indicators(f, l);
  CHECK(p.num_gambles() == 4);
  for (int l1 = 0; l1 < 3; ++l1) {
    const int row = 1 + l1;
    CHECK(p.gambles.row(row) == Vec::Unit(3, l1).transpose());
    for (int k = 0; k < 3; ++k) {
      if (k == l1)
        CHECK(p.lower_bounds(row, k) == kNoBound);
      else
        CHECK(p.lower_bounds(row, k) == 0.0);
    }
  }
  CHECK(!p.notes.empty());

  // Indicators already present and adequately bounded: nothing is added.
  const Problem& e1 = test::example1();
  CHECK(e1.num_gambles() == 9);  // six gambles plus three appended indicators

  // A weak off-row indicator bound is raised to zero.
  Mat f2(2, 2);
  f2 << 1, 0, 0, 1;
  Mat l2(2, 2);
  l2 << -3, -0.5, 0.2, -4;
  Problem p2 = with_indicators(f2, l2);
  CHECK(p2.num_gambles() == 2);
  CHECK(p2.lower_bounds(0, 1) == 0.0);   // was -0.5
  CHECK(p2.lower_bounds(1, 0) == 0.2);   // positive bound kept
  CHECK(p2.lower_bounds(0, 0) == -3.0);  // own-row bound untouched
}

TEST_CASE("interval conversion") {
  Mat lo(2, 2), hi(2, 2);
  lo << -2, 1, 0.5, -1;
  hi << -1, 2, 1, -0.5;
  Problem p = from_intervals(lo, hi);
  validate(p);
  CHECK(p.validated);
  // Entry bounds are reproduced by the coordinate ranges.
  CHECK(p.coord_min(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.coord_max(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(p.coord_min(0, 0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(p.coord_max(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));

  SUBCASE("crossed bounds rejected") {
    Mat bad = hi;
    bad(0, 1) = 0.5;  // upper below lower: the entry interval is empty
    CHECK_THROWS_AS(from_intervals(lo, bad), InfeasibleModel);
  }
  SUBCASE("negative upper off-diagonal rejected") {
    Mat lo2 = lo, hi2 = hi;
    lo2(1, 0) = -0.4;
    hi2(1, 0) = -0.2;  // clashes with rate non-negativity
    CHECK_THROWS_AS(from_intervals(lo2, hi2), InfeasibleModel);
  }
  SUBCASE("row without a zero-sum point rejected") {
    Mat lo3(2, 2), hi3(2, 2);
    lo3 << -0.1, 1, 1, -2;
    hi3 << -0.05, 2, 2, -1;  // row 0: off-diagonal at least 1, diagonal above -0.1
    CHECK_THROWS_AS(from_intervals(lo3, hi3), InfeasibleModel);
  }
}

TEST_CASE("validation fills coordinate ranges and point rows") {
  std::mt19937 rng(23);
  const Mat q = test::random_precise_q(rng, 3);
  Problem single = from_intervals(q, q);
  validate(single);
  for (int k = 0; k < 3; ++k) {
    CHECK(single.point_row[k]);
    for (int l = 0; l < 3; ++l) {
      CHECK(single.coord_min(k, l) == doctest::Approx(q(k, l)).epsilon(1e-9));
      CHECK(single.coord_max(k, l) == doctest::Approx(q(k, l)).epsilon(1e-9));
    }
  }
  for (int k = 0; k < 3; ++k) CHECK(!test::example1().point_row[k]);
}

TEST_CASE("unbounded row rejected by validation") {
  // Row 0 only bounds q·(-1,1) from below, so the off-diagonal rate is free
  // to grow and the exit rate is unbounded.
  Mat f(1, 2);
  f << -1, 1;
  Mat l(1, 2);
  l << -0.9, -0.9;
  Problem p = with_indicators(f, l);
  CHECK_THROWS_AS(validate(p), UnboundedModel);
}

TEST_SUITE_END();
