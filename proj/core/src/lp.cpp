#include "ictmc/lp.hpp"

#include <algorithm>
#include <sstream>

namespace ictmc {

namespace {

constexpr double kPivTol = 1e-11;
constexpr int kIterCap = 20000;

// Dense two-phase tableau simplex for  min c·x  s.t.  A x = b, x >= 0.
//
// Entering column: lowest index with reduced cost below -tol (Bland).
// Leaving row: minimum ratio, ties resolved by lowest basis variable index.
// Together these make the vertex selection fully deterministic and cycle
// free.  Solutions are re-derived from the final basis against the original
// data, so results carry factorization-level accuracy, not accumulated
// tableau roundoff.
class Simplex {
 public:
  Simplex(const Mat& A, const Vec& b)
      : rows_(static_cast<int>(A.rows())), cols_(static_cast<int>(A.cols())) {
    t_.resize(rows_, cols_ + rows_ + 1);
    t_.leftCols(cols_) = A;
    t_.middleCols(cols_, rows_) = Mat::Identity(rows_, rows_);
    t_.col(cols_ + rows_) = b;
    for (int r = 0; r < rows_; ++r)
      if (t_(r, cols_ + rows_) < 0) t_.row(r) = -t_.row(r);
    basis_.resize(rows_);
    for (int r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
  }

  // Minimizes the artificial sum; returns the residual infeasibility.
  // The residual is read off before eviction: pivoting a positive-level
  // artificial onto a real column would erase the evidence of infeasibility.
  double phase1(LpStats* stats) {
    Vec costs = Vec::Zero(cols_ + rows_);
    costs.tail(rows_).setOnes();
    run(costs, cols_ + rows_, stats);
    double infeas = 0;
    for (int r = 0; r < rows_; ++r)
      if (basis_[r] >= cols_) infeas += rhs(r);
    evict_artificials();
    return infeas;
  }

  // Minimizes real costs with artificial columns barred from entering.
  // Returns false when the problem is unbounded below.
  bool phase2(const Vec& costs, LpStats* stats) {
    Vec padded = Vec::Zero(cols_ + rows_);
    padded.head(cols_) = costs;
    return run(padded, cols_, stats);
  }

  const std::vector<int>& basis() const { return basis_; }
  double rhs(int r) const { return t_(r, cols_ + rows_); }
  bool has_artificial() const {
    return std::any_of(basis_.begin(), basis_.end(), [&](int j) { return j >= cols_; });
  }

 private:
  bool run(const Vec& costs, int enter_limit, LpStats* stats) {
    const double rc_tol = 1e-10 * (1.0 + costs.cwiseAbs().maxCoeff());
    for (int iter = 0; iter < kIterCap; ++iter) {
      Vec cb(rows_);
      for (int r = 0; r < rows_; ++r) cb(r) = costs(basis_[r]);

      int enter = -1;
      for (int j = 0; j < enter_limit; ++j) {
        if (is_basic(j)) continue;
        const double z = costs(j) - cb.dot(t_.col(j));
        if (z < -rc_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double piv = t_(r, enter);
        if (piv <= kPivTol) continue;
        const double ratio = std::max(rhs(r), 0.0) / piv;
        if (leave < 0) {
          best = ratio;
          leave = r;
          continue;
        }
        const double slack = 1e-12 * (1.0 + best);
        if (ratio < best - slack) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;

      pivot(leave, enter);
      if (stats) ++stats->pivots;
    }
    throw NumericalError("simplex iteration limit exceeded");
  }

  // Degenerate pivots that push leftover zero-level artificial variables out
  // of the basis; rows they cannot leave are redundant and stay inert.
  // Artificials sitting at a positive level are genuine infeasibility and
  // must remain visible to the caller.
  void evict_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      const double row_scale = 1.0 + t_.row(r).head(cols_).cwiseAbs().maxCoeff();
      if (std::abs(rhs(r)) > kPivTol * row_scale) continue;
      for (int j = 0; j < cols_; ++j) {
        if (is_basic(j)) continue;
        if (std::abs(t_(r, j)) > kPivTol * row_scale) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  bool is_basic(int j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  void pivot(int r, int j) {
    t_.row(r) /= t_(r, j);
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = j;
  }

  int rows_, cols_;
  Mat t_;
  std::vector<int> basis_;
};

}  // namespace

// Row minimization is solved through its dual
//   max b·lambda  s.t.  sum lambda_i f_i + mu·1 = h,  lambda >= 0,
// brought to standard form by splitting mu.  The optimal dual basis B pins
// the primal vertex exactly: q solves f_i·q = b_i for the basic lambda
// columns together with 1·q = 0, recovered as q = -y where M_B' y = c_B.
LpSolution minimize_row(const Problem& p, int k, const Vec& h, LpStats* stats) {
  const int m = p.num_states();
  if (k < 0 || k >= m) throw InvalidModel("row index out of range");
  if (h.size() != m) throw InvalidModel("gamble dimension mismatch");
  if (stats) ++stats->calls;

  std::vector<int> cons;  // gamble indices with a finite bound in row k
  cons.reserve(p.num_gambles());
  for (int i = 0; i < p.num_gambles(); ++i)
    if (p.lower_bounds(i, k) != kNoBound) cons.push_back(i);
  const int n = static_cast<int>(cons.size());

  Mat M(m, n + 2);
  Vec costs(n + 2);
  for (int j = 0; j < n; ++j) {
    M.col(j) = p.gambles.row(cons[j]).transpose();
    costs(j) = -p.lower_bounds(cons[j], k);
  }
  M.col(n) = Vec::Ones(m);
  M.col(n + 1) = -Vec::Ones(m);
  costs(n) = costs(n + 1) = 0;

  Simplex s(M, h);
  const double infeas = s.phase1(stats);
  if (infeas > tol::feas * (1.0 + max_norm(h))) {
    std::ostringstream os;
    os << "row " << k << ": polytope is unbounded in the objective direction";
    throw UnboundedModel(os.str());
  }
  if (!s.phase2(costs, stats)) {
    std::ostringstream os;
    os << "row " << k << ": polytope is empty";
    throw InfeasibleModel(os.str());
  }
  if (s.has_artificial()) throw NumericalError("degenerate dual basis could not be repaired");

  Mat MB(m, m);
  Vec cB(m);
  for (int r = 0; r < m; ++r) {
    MB.col(r) = M.col(s.basis()[r]);
    cB(r) = costs(s.basis()[r]);
  }
  const Vec y = MB.transpose().partialPivLu().solve(cB);

  LpSolution out;
  out.vertex = -y;
  out.value = out.vertex.dot(h);
  for (int j = 0; j < n; ++j) {
    const double b = p.lower_bounds(cons[j], k);
    if (std::abs(out.vertex.dot(M.col(j)) - b) <= tol::active(b))
      out.active_set.push_back(cons[j]);
  }
  return out;
}

LowerApply lower_operator_apply(const Problem& p, const Vec& h, LpStats* stats) {
  const int m = p.num_states();
  LowerApply out;
  out.Q.resize(m, m);
  out.values.resize(m);
  for (int k = 0; k < m; ++k) {
    LpSolution sol = minimize_row(p, k, h, stats);
    out.Q.row(k) = sol.vertex.transpose();
    out.values(k) = sol.value;
  }
  return out;
}

NonnegCombination nonneg_combination(const Mat& candidates, const Vec& target,
                                     LpStats* stats) {
  const int m = static_cast<int>(candidates.rows());
  const int n = static_cast<int>(candidates.cols());
  if (target.size() != m) throw InvalidModel("target dimension mismatch");
  if (stats) ++stats->calls;

  Mat M(m, n + 2);
  M.leftCols(n) = candidates;
  M.col(n) = Vec::Ones(m);
  M.col(n + 1) = -Vec::Ones(m);

  const double scale = 1.0 + max_norm(target);
  Simplex s(M, target);
  if (s.phase1(stats) > tol::feas * scale)
    throw NotInCone("target admits no non-negative decomposition over the candidates");

  // Re-solve the basic coordinates against the original columns; leftover
  // zero-level artificials simply drop out.
  std::vector<int> real;
  for (int j : s.basis())
    if (j < n + 2) real.push_back(j);
  Mat MB(m, static_cast<int>(real.size()));
  for (size_t r = 0; r < real.size(); ++r) MB.col(static_cast<int>(r)) = M.col(real[r]);
  const Vec x = MB.colPivHouseholderQr().solve(target);
  if (max_norm(MB * x - target) > tol::feas * scale)
    throw NotInCone("decomposition residual exceeds tolerance");

  NonnegCombination out;
  out.coeffs = Vec::Zero(n);
  for (size_t r = 0; r < real.size(); ++r) {
    const int j = real[r];
    double v = x(static_cast<int>(r));
    if (v < 0 && v > -1e-9 * scale) v = 0;
    if (j < n) {
      if (v < 0) throw NotInCone("negative coefficient in basic decomposition");
      out.coeffs(j) = v;
    } else {
      out.constant += (j == n) ? x(static_cast<int>(r)) : -x(static_cast<int>(r));
    }
  }
  return out;
}

}  // namespace ictmc
