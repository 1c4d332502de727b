#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ictmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Marks "no lower bound" entries in the constraint table.
inline constexpr double kNoBound = -std::numeric_limits<double>::infinity();

// Shared numeric tolerances.  Everything downstream (active-set detection,
// cone construction, certificates) is calibrated against these.
namespace tol {
inline constexpr double row = 1e-9;       // row-sum / sign validation slack
inline constexpr double feas = 1e-9;      // LP feasibility and reconstruction slack
inline constexpr double cone = 1e-8;      // negative coefficients below this are round-off
inline constexpr double cond_max = 1e10;  // ceiling on the basis condition estimate
inline constexpr int r_cap = 200;         // hard cap on partial-sum series length

inline double active(double bound) { return 1e-7 * (1.0 + std::abs(bound)); }
}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidModel : Error {
  using Error::Error;
};
struct InfeasibleModel : Error {
  using Error::Error;
};
struct UnboundedModel : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

// Imprecise transition rate matrix with separately specified rows.
//
// Row k ranges over the polytope
//   { q in R^m : q·1 = 0,  q·f_i >= lower_bounds(i,k) whenever finite },
// where the gamble list always contains every coordinate indicator with an
// off-row bound >= 0, so rate non-negativity is part of the constraint set.
struct Problem {
  Mat gambles;       // N x m, one gamble per row
  Mat lower_bounds;  // N x m, (i,k) = bound on q_k·f_i, kNoBound when absent
  std::string name;
  std::string description;
  std::vector<std::string> notes;  // augmentation / conversion log

  // Filled in by validate().
  bool validated = false;
  Mat coord_min;                // m x m, (k,l) = min of q_l over row k's polytope
  Mat coord_max;                // m x m, max counterpart
  std::vector<char> point_row;  // row polytope is a single point

  int num_states() const { return static_cast<int>(gambles.cols()); }
  int num_gambles() const { return static_cast<int>(gambles.rows()); }
};

double max_norm(const Vec& f);
double operator_norm(const Mat& Q);          // max absolute row sum
double variational_seminorm(const Vec& f);   // max f - min f
double center_seminorm(const Vec& f);        // half the variational seminorm

// Builds a Problem from a gamble/bound table, appending any missing
// coordinate indicators (off-row bound 0, own-row unconstrained).  Off-row
// bounds of indicators already present are raised to at least 0; every such
// adjustment is recorded in notes.
Problem with_indicators(const Mat& gambles, const Mat& lower_bounds);

// Entrywise interval [q_lower, q_upper] model, expressed through indicator
// gambles: q·1_l >= q_lower(k,l) and q·(-1_l) >= -q_upper(k,l) for row k.
Problem from_intervals(const Mat& q_lower, const Mat& q_upper);

// Certifies every row polytope non-empty and bounded by minimizing and
// maximizing each coordinate, caching the ranges and flagging rows whose
// polytope is a single point.  Throws InvalidModel / InfeasibleModel /
// UnboundedModel.
void validate(Problem& p);

// ||Q|| = 2 max_k |min over row k of q_k(k)|; equals the largest operator
// norm attained over the set.
double qset_norm(const Problem& p);

// Safe bound 2||Q|| on the imprecision (diameter) of the set.
double imprecision_bound(const Problem& p);

}  // namespace ictmc
