#include "doctest.h"

#include "ictmc/solver.hpp"
#include "support.hpp"

using namespace ictmc;

TEST_SUITE_BEGIN("solver");

TEST_CASE("worked example completes in three exact steps") {
  const Problem& p = test::example1();
  const Vec h = test::example1_h();

  // The published trajectory belongs to the negated gamble; see the lp and
  // cones suites for the face it rides.
  const SolveReport up = solve_adaptive(p, -h, 1.0, 1e-3);
  CHECK(up.steps.size() == 3);
  CHECK(up.steps[0].dt == doctest::Approx(0.99 * 240.0 / 307).epsilon(1e-12));
  for (const StepCertificate& s : up.steps) CHECK(s.exact);
  const Vec h1 = -up.h_T;
  CHECK(std::abs(h1(0) - -0.107789092019201) < 1e-9);
  CHECK(std::abs(h1(1) - 0.552242160179236) < 1e-9);
  CHECK(std::abs(h1(2) - -0.366297008130663) < 1e-9);

  // The direct run is exact as well and needs the same number of steps.
  const SolveReport low = solve_adaptive(p, h, 1.0, 1e-3);
  CHECK(low.steps.size() == 3);
  CHECK(low.max_err < 1e-9);
  for (const StepCertificate& s : low.steps) CHECK(s.exact);

  // Certified ledger: intervals tile [0, T] and errors follow the formula.
  double t = 0;
  for (const StepCertificate& s : low.steps) {
    CHECK(s.t_start == doctest::Approx(t).epsilon(1e-12));
    t += s.dt;
    CHECK(s.step_error ==
          doctest::Approx(step_error_bound(s.epsilon, s.dt, qset_norm(p),
                                           imprecision_bound(p)))
              .epsilon(1e-9));
  }
  CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singleton model advances in one exact exponential step") {
  std::mt19937 rng(61);
  const Mat q = test::random_precise_q(rng, 4);
  Problem p = from_intervals(q, q);
  validate(p);
  const Vec h = test::random_gamble(rng, 4, -2, 2);
  const SolveReport r = solve_adaptive(p, h, 0.8, 1e-3);
  CHECK(r.steps.size() == 1);
  CHECK(r.steps[0].exact);
  CHECK(max_norm(r.h_T - matrix_exponential(q, 0.8) * h) < 1e-12);
}

TEST_CASE("constant gamble is a fixed point") {
  const Problem& p = test::example1();
  const Vec h = Vec::Constant(3, 2.5);
  const SolveReport r = solve_adaptive(p, h, 1.0, 1e-3);
  CHECK(r.steps.size() == 1);
  CHECK(max_norm(r.h_T - h) < 1e-12);
  CHECK(r.max_err < 1e-8);
}

TEST_CASE("zero horizon echoes the gamble") {
  const Problem& p = test::example1();
  const Vec h = test::example1_h();
  const SolveReport r = solve_adaptive(p, h, 0.0, 1e-3);
  CHECK(r.steps.empty());
  CHECK(max_norm(r.h_T - h) == 0.0);
  CHECK(r.max_err == 0.0);
}

TEST_CASE("validation is a precondition") {
  Mat f(1, 2);
  f << 1, -1;
  Mat l(1, 2);
  l << -0.5, -0.5;
  Problem p = with_indicators(f, l);  // not validated
  CHECK_THROWS_AS(solve_adaptive(p, (Vec(2) << 1, 0).finished(), 1.0, 1e-3), InvalidModel);
}

TEST_CASE("budget ledger on random models") {
  std::mt19937 rng(67);
  for (int t = 0; t < 10; ++t) {
    const auto rm = test::random_model(rng);
    const Problem& p = rm.problem;
    const Vec h = test::random_gamble(rng, p.num_states());
    const double E = 1e-3;
    const SolveReport r = solve_adaptive(p, h, 0.7, E);
    CHECK(r.max_err <= E * (1 + 1e-12));
    double t_sum = 0, err_sum = 0;
    for (const StepCertificate& s : r.steps) {
      t_sum += s.dt;
      err_sum += s.step_error;
      CHECK(s.epsilon >= 0.0);
    }
    CHECK(t_sum == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(err_sum == doctest::Approx(r.max_err).epsilon(1e-12));
  }
}

TEST_CASE("upper approximation dominates a fine-grid oracle") {
  std::mt19937 rng(71);
  for (int t = 0; t < 6; ++t) {
    const auto rm = test::random_model(rng, 3, 2);
    const Problem& p = rm.problem;
    const Vec h = test::random_gamble(rng, p.num_states());
    const SolveReport r = solve_adaptive(p, h, 0.5, 1e-3);
    const long n = required_steps_uniform(0.5, qset_norm(p), center_seminorm(h), 1e-4);
    const GridReport g = solve_uniform_exp(p, h, 0.5, n);
    // Both iterations over-approximate the true minimal solution, so the
    // adaptive result cannot sit below the oracle by more than its bound.
    CHECK((r.h_T - g.h_T).minCoeff() >= -(g.bound + 1e-10));
    // And they agree within the two certificates.
    CHECK(max_norm(r.h_T - g.h_T) <= r.max_err + g.bound + 1e-10);
  }
}

TEST_CASE("solutions contract the seminorm and stay Lipschitz in the gamble") {
  std::mt19937 rng(73);
  for (int t = 0; t < 8; ++t) {
    const auto rm = test::random_model(rng);
    const Problem& p = rm.problem;
    const Vec f = test::random_gamble(rng, p.num_states());
    const Vec g = test::random_gamble(rng, p.num_states());
    const SolveReport rf = solve_adaptive(p, f, 0.6, 1e-4);
    const SolveReport rg = solve_adaptive(p, g, 0.6, 1e-4);
    CHECK(center_seminorm(rf.h_T) <= center_seminorm(f) + 2 * rf.max_err + 1e-9);
    // The exact semigroup is sup-norm nonexpansive.
    CHECK(max_norm(rf.h_T - rg.h_T) <=
          max_norm(f - g) + rf.max_err + rg.max_err + 1e-9);
  }
}

TEST_CASE("tighter budgets refine the answer consistently") {
  const Problem& p = test::example2();
  const Vec h = Vec::Unit(4, 0);
  const SolveReport coarse = solve_adaptive(p, h, 0.3, 1e-2);
  const SolveReport fine = solve_adaptive(p, h, 0.3, 1e-4);
  CHECK(fine.max_err <= 1e-4 * (1 + 1e-12));
  CHECK(max_norm(coarse.h_T - fine.h_T) <= coarse.max_err + fine.max_err + 1e-12);
  CHECK(fine.steps.size() >= coarse.steps.size());
}

TEST_CASE("budget exhaustion carries the partial run") {
  const Problem& p = test::example1();
  const Vec h = test::example1_h();
  // An impossibly small budget: even floor-length intervals cost more than
  // their proportional share once the tail margin makes epsilon positive.
  try {
    solve_adaptive(p, h, 1.0, 1e-30);
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial.max_err <= 1e-30);
    double covered = 0;
    for (const StepCertificate& s : e.partial.steps) covered += s.dt;
    CHECK(covered < 1.0);
    CHECK(e.partial.h_T.size() == 3);
    CHECK(!e.partial.notes.empty());
  }
}

TEST_CASE("uniform exponential grid") {
  const Problem& p = test::example1();
  const Vec h = test::example1_h();

  const GridReport g1 = solve_uniform_exp(p, h, 1.0, 1);
  CHECK(g1.n == 1);
  CHECK(g1.variant == "exp");

  // Self-convergence: doubling n moves the result by less than the bound.
  const GridReport a = solve_uniform_exp(p, h, 1.0, 64);
  const GridReport b = solve_uniform_exp(p, h, 1.0, 128);
  CHECK(max_norm(a.h_T - b.h_T) <= a.bound + b.bound);
  CHECK(b.bound < a.bound);

  // At the published matched-error step count the grid agrees with the
  // adaptive answer to the tolerance both certify.
  const SolveReport ad = solve_adaptive(p, h, 1.0, 1e-3);
  const GridReport fine = solve_uniform_exp(p, h, 1.0, 1490);
  CHECK(max_norm(ad.h_T - fine.h_T) <= 1e-3 + fine.bound);

  // Singleton: one step equals the exponential.
  std::mt19937 rng(79);
  const Mat q = test::random_precise_q(rng, 3);
  Problem single = from_intervals(q, q);
  validate(single);
  const Vec h3 = test::random_gamble(rng, 3);
  const GridReport s = solve_uniform_exp(single, h3, 0.9, 1);
  CHECK(max_norm(s.h_T - matrix_exponential(q, 0.9) * h3) < 1e-12);
}

TEST_CASE("uniform euler grid") {
  const Problem& p = test::example1();
  const Vec h = test::example1_h();

  // Too coarse: the substochasticity precondition fails.
  CHECK_THROWS_AS(solve_uniform_euler(p, h, 10.0, 2), StepTooCoarse);

  const GridReport e = solve_uniform_euler(p, h, 1.0, 4000);
  const GridReport x = solve_uniform_exp(p, h, 1.0, 4000);
  CHECK(e.variant == "euler");
  CHECK(max_norm(e.h_T - x.h_T) < 1e-2);

  // First-order update done by hand for one step.
  const GridReport one = solve_uniform_euler(p, h, 0.1, 1);
  const LowerApply la = lower_operator_apply(p, h);
  CHECK(max_norm(one.h_T - (h + 0.1 * la.values)) < 1e-12);
}

TEST_CASE("required steps for the uniform grid") {
  // Published comparison point.
  const long n = required_steps_uniform(1.0, 1.82, 0.45, 1e-3);
  CHECK(n >= 1490);
  CHECK(n <= 1639);

  // Trivial regimes.
  CHECK(required_steps_uniform(1.0, 0.0, 0.45, 1e-3) == 1);
  CHECK(required_steps_uniform(1.0, 1.82, 0.0, 1e-3) == 1);
  CHECK(required_steps_uniform(1.0, 1.82, 0.45, 1e9) == 1);

  // The bound at the returned n clears the budget and n is minimal.
  auto bound = [](long nn, double T, double q, double hc) {
    const double x = T * q / nn;
    return 2 * nn * hc * (1 - std::exp(x) * (1 - x));
  };
  CHECK(bound(n, 1.0, 1.82, 0.45) <= 1e-3);
  CHECK(bound(n - 1, 1.0, 1.82, 0.45) > 1e-3);

  // Halving the budget cannot shrink the grid.
  CHECK(required_steps_uniform(1.0, 1.82, 0.45, 5e-4) >= n);
}

TEST_CASE("transition bounds on the interval example") {
  const Problem& p = test::example2();
  const TransitionBounds b = transition_bounds(p, 0, 1.0, 1e-3);
  CHECK(b.lower_err <= 1e-3);
  CHECK(b.upper_err <= 1e-3);
  for (int j = 0; j < 4; ++j) {
    CHECK(b.lower(j) <= b.upper(j) + 1e-12);
    CHECK(b.lower(j) >= -1e-9);
    CHECK(b.upper(j) <= 1 + 1e-9);
  }
  CHECK(b.converged);

  // Zero horizon: the indicator itself.
  const TransitionBounds z = transition_bounds(p, 2, 0.0, 1e-3);
  CHECK(max_norm(z.lower - Vec::Unit(4, 2)) == 0.0);
  CHECK(max_norm(z.upper - Vec::Unit(4, 2)) == 0.0);
}

TEST_CASE("debug invariants populate the report") {
  const Problem& p = test::example1();
  AdaptiveOptions opts;
  opts.debug_invariants = true;
  const SolveReport r = solve_adaptive(p, -test::example1_h(), 1.0, 1e-3, opts);
  CHECK(std::isfinite(r.debug_min_coeff));
  CHECK(r.debug_min_coeff >= -1e-8);
  CHECK(std::isfinite(r.debug_max_operator_gap));
  CHECK(r.debug_max_operator_gap >= 0.0);
}

TEST_SUITE_END();
