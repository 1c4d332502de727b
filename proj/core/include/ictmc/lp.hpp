#pragma once

#include "ictmc/model.hpp"

namespace ictmc {

struct NotInCone : Error {
  using Error::Error;
};

struct LpSolution {
  Vec vertex;                   // a vertex minimizer of q·h over the row polytope
  double value = 0;             // vertex·h
  std::vector<int> active_set;  // gamble indices tight at the vertex
};

struct LpStats {
  long calls = 0;
  long pivots = 0;
};

// Minimizes q·h over row k's polytope.  The returned point is always a
// vertex, solved exactly from the final basis system rather than read off
// the tableau, so active-set identification downstream sees residuals at
// solver precision.  Throws InfeasibleModel / UnboundedModel.
LpSolution minimize_row(const Problem& p, int k, const Vec& h, LpStats* stats = nullptr);

struct LowerApply {
  Mat Q;       // row k = vertex minimizer for row k
  Vec values;  // componentwise minimum, values(k) = Q.row(k)·h
};

// Applies the lower rate operator: stacks minimize_row over all rows.
LowerApply lower_operator_apply(const Problem& p, const Vec& h, LpStats* stats = nullptr);

struct NonnegCombination {
  Vec coeffs;           // one per candidate column, all >= 0
  double constant = 0;  // signed coefficient on the all-ones vector
};

// Writes target = candidates·coeffs + constant·1 with coeffs >= 0, via the
// phase-1 auxiliary problem.  The solution is basic, so the positive-
// coefficient columns are linearly independent.  Throws NotInCone when no
// such decomposition exists within tol::feas.
NonnegCombination nonneg_combination(const Mat& candidates, const Vec& target,
                                     LpStats* stats = nullptr);

}  // namespace ictmc
