#pragma once

#include "ictmc/expstep.hpp"

#include <optional>

namespace ictmc {

struct StepCertificate {
  double t_start = 0;
  double dt = 0;
  Mat Q;                 // minimizing matrix used on [t_start, t_start+dt]
  double epsilon = 0;    // cone-exit bound over the interval
  double step_error = 0; // certified error contribution
  bool exact = false;    // epsilon == 0 within tol::cone
  int r_used = 0;        // longest partial-sum series among the step's cones
  int halvings = 0;      // certificate-failure halvings before acceptance
};

struct SolveReport {
  Vec h_T;
  double max_err = 0;  // sum of step errors, certified total
  std::vector<StepCertificate> steps;
  long lp_calls = 0;
  double wall_seconds = 0;
  std::vector<std::string> notes;

  // Populated only when debug invariants are enabled.
  double debug_min_coeff = std::numeric_limits<double>::quiet_NaN();
  double debug_max_operator_gap = std::numeric_limits<double>::quiet_NaN();
};

struct BudgetExhausted : Error {
  BudgetExhausted(const std::string& msg, SolveReport partial_report)
      : Error(msg), partial(std::move(partial_report)) {}
  SolveReport partial;
};

struct StepTooCoarse : Error {
  using Error::Error;
};

struct AdaptiveOptions {
  double dt_min = 0;             // <= 0 means 0.01·T
  bool debug_invariants = false; // interior-time cone/operator checks per step
};

// Adaptive certified solve of dh/dt = lower(Q)h over [0, T] with total error
// budget E: minimize rates, build the per-row cones at the current h, guess
// an interval from the linear approximation, certify it via the partial-sum
// bound against the proportional budget share, halve on failure, then
// advance h by the matrix exponential of the frozen minimizer.  Unspent
// budget rolls forward.  Throws BudgetExhausted (carrying the partial
// report) when even the floor interval cannot meet the residual budget.
SolveReport solve_adaptive(const Problem& p, const Vec& h0, double T, double E,
                           const AdaptiveOptions& opts = {});

struct GridReport {
  Vec h_T;
  long n = 0;
  double bound = 0;  // closed-form error value for (n, T, qnorm, ||h0||_c)
  std::string variant;
  long lp_calls = 0;
};

// n equal steps; each re-minimizes the rate matrix and advances by its
// exponential.  bound is the rigorous uniform-grid estimate.
GridReport solve_uniform_exp(const Problem& p, const Vec& h0, double T, long n);

// First-order variant h <- h + dt·lower(Q)h.  Requires dt·(max exit rate)
// <= 1, i.e. 2n >= T·qnorm, so I + dt·Q stays substochastic-like; otherwise
// throws StepTooCoarse.  bound is the reference value n·dt²·||h0||_c·qnorm²,
// not a certificate.
GridReport solve_uniform_euler(const Problem& p, const Vec& h0, double T, long n);

// Smallest n whose uniform-grid bound 2n·h_norm·(1 - e^x(1-x)), x = T·qnorm/n,
// is <= E.  Monotone bisection.
long required_steps_uniform(double T, double qnorm, double h_norm, double E);

struct TransitionBounds {
  int state = 0;
  double T = 0;
  Vec lower;  // lower(j)  = certified lower bound on P(state at T | start j)
  Vec upper;
  double lower_err = 0, upper_err = 0;
  double lower_seminorm = 0, upper_seminorm = 0;  // variational seminorms of h_T
  long lower_steps = 0, upper_steps = 0;
  long lp_calls = 0;
  bool converged = false;  // both seminorms < 2E: bounds no longer depend on start
};

// Reachability bounds for one target state: lower from h0 = indicator,
// upper from the negated indicator (conjugacy), each certified to error E.
TransitionBounds transition_bounds(const Problem& p, int i, double T, double E);

}  // namespace ictmc
