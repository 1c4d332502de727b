#pragma once

#include "ictmc/cones.hpp"

namespace ictmc {

// Taylor partial sums p_r(T·Q_J)·alpha0 tracked in the cone basis.  epsilon
// bounds how far any partial sum leaves the cone, measured back in gamble
// space through the center seminorm; the series tail past r_used is folded
// in as tail_margin so the bound quantifies over every r.
struct PartialSumTrace {
  double horizon = 0;
  std::vector<Vec> partial;  // alpha_r for r = 0..r_used
  Vec limit;                 // e^{T Q_J} alpha0
  double eps_raw = 0;        // max_r || M_J (alpha_r)^- ||_c over recorded r
  double tail_margin = 0;    // contribution bound for r > r_used
  double epsilon = 0;        // eps_raw + tail_margin
  int r_used = 0;
  bool overflow = false;     // series not converged within tol::r_cap terms
};

// e^{tQ} by scaling and squaring of a truncated Taylor series, scaled so
// ||tQ/2^s|| <= 0.5.
Mat matrix_exponential(const Mat& Q, double t);

PartialSumTrace partial_sum_trace(const ConeBasis& basis, const Mat& QJ, double T);

// Aggregate cone-exit bound for one step: max over the traces (one per
// distinct cone, covering every row).  +inf when any trace overflowed.
double estimate_epsilon(const std::vector<PartialSumTrace>& traces);

// Certified per-step error (e^{qnorm·dt} - 1)·(iota_bound/qnorm)·epsilon.
double step_error_bound(double epsilon, double dt, double qnorm, double iota_bound);

// Worst-case per-step error 2·h_c·(1 - e^{dt·qnorm}(1 - dt·qnorm)) used by
// the uniform-grid analysis; O(dt^2) as dt -> 0.
double worst_case_step_error(double dt, double qnorm, double h_center);

// First feasible-interval guess from the linear approximation
// alpha0 + t·Q_J·alpha0 >= 0 on the non-constant coordinates, shrunk by a
// safety factor and floored at dt_min; a zero coefficient with negative
// velocity means the vertex is about to change, so only dt_min is tried.
double initial_interval_guess(const ConeBasis& basis, const Mat& QJ, double remaining,
                              double dt_min);

}  // namespace ictmc
