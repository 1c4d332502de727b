#pragma once

#include "ictmc/lp.hpp"

namespace ictmc {

struct RankDeficientActiveSet : Error {
  using Error::Error;
};
struct IllConditionedBasis : Error {
  using Error::Error;
};

// Basis of the (sub)cone of gambles minimized at a given vertex of row k's
// polytope: the constant vector plus m-1 linearly independent active
// gambles.  Column 0 of basis_matrix is always the all-ones vector.
struct ConeBasis {
  int row = -1;
  std::vector<int> indices;  // gamble indices J; column j+1 is gambles.row(J[j])
  Mat basis_matrix;          // m x m, invertible
  Mat inverse;
  Vec alpha0;   // coefficients of h: alpha0(0) signed, alpha0(j>=1) >= -tol::cone
  double cond;  // 1-norm condition estimate of basis_matrix
};

// All gamble indices whose constraint is tight at q within the active-set
// tolerance.  Throws RankDeficientActiveSet when the actives together with
// the constant vector fail to span R^m (tolerance too tight for a vertex).
std::vector<int> active_indices(const Problem& p, int k, const Vec& q);

struct ReducedCombination {
  std::vector<int> indices;  // surviving gamble indices, linearly independent
  Vec coeffs;                // aligned with indices, all >= 0
  double constant = 0;
};

// Thins a non-negative combination target = sum coeffs_i·f_i + constant·1
// down to a linearly independent subset, repeatedly cancelling along
// null-space directions so one coefficient hits zero while the rest stay
// non-negative.
ReducedCombination reduce_to_independent(const Problem& p, const std::vector<int>& indices,
                                         Vec coeffs, double constant, const Vec& target);

// Extends {1} ∪ subset to a full basis using gambles from pool (in order),
// then caches the inverse, condition estimate, and the coefficients of h.
// Throws RankDeficientActiveSet / IllConditionedBasis.
ConeBasis complete_to_basis(const Problem& p, int row, const std::vector<int>& subset,
                            const std::vector<int>& pool, const Vec& h);

// Q_J = M_J^{-1} Q M_J.  Throws IllConditionedBasis above tol::cond_max.
Mat change_of_basis(const Mat& Q, const ConeBasis& basis);

// Per-row cone bases with duplicates (same index set) merged.
struct ConeFamily {
  std::vector<ConeBasis> cones;
  std::vector<std::vector<int>> rows;  // rows(i) = model rows sharing cones(i)
};

ConeFamily dedup_cones(const std::vector<ConeBasis>& per_row);

}  // namespace ictmc
