#include "ictmc/model.hpp"

#include "ictmc/lp.hpp"

#include <sstream>

namespace ictmc {

double max_norm(const Vec& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

double operator_norm(const Mat& Q) {
  double best = 0;
  for (Eigen::Index k = 0; k < Q.rows(); ++k) best = std::max(best, Q.row(k).cwiseAbs().sum());
  return best;
}

double variational_seminorm(const Vec& f) {
  return f.size() == 0 ? 0.0 : f.maxCoeff() - f.minCoeff();
}

double center_seminorm(const Vec& f) { return 0.5 * variational_seminorm(f); }

namespace {

bool is_indicator_of(const Vec& g, int l) {
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double want = (j == l) ? 1.0 : 0.0;
    if (g(j) != want) return false;
  }
  return true;
}

void check_table(const Mat& gambles, const Mat& lower_bounds) {
  if (gambles.cols() < 1) throw InvalidModel("model needs at least one state");
  if (gambles.rows() != lower_bounds.rows() || gambles.cols() != lower_bounds.cols())
    throw InvalidModel("gamble and bound tables must have identical shape");
  if (!gambles.allFinite()) throw InvalidModel("gambles must be finite");
  for (Eigen::Index i = 0; i < lower_bounds.rows(); ++i)
    for (Eigen::Index k = 0; k < lower_bounds.cols(); ++k) {
      const double b = lower_bounds(i, k);
      if (std::isnan(b) || b == std::numeric_limits<double>::infinity())
        throw InvalidModel("lower bounds must be finite or absent");
    }
}

}  // namespace

Problem with_indicators(const Mat& gambles, const Mat& lower_bounds) {
  check_table(gambles, lower_bounds);
  const int m = static_cast<int>(gambles.cols());

  Problem p;
  p.gambles = gambles;
  p.lower_bounds = lower_bounds;

  std::vector<int> indicator_row(m, -1);
  for (int i = 0; i < p.num_gambles(); ++i)
    for (int l = 0; l < m; ++l)
      if (indicator_row[l] < 0 && is_indicator_of(p.gambles.row(i), l)) indicator_row[l] = i;

  int appended = 0;
  for (int l = 0; l < m; ++l)
    if (indicator_row[l] < 0) ++appended;

  if (appended > 0) {
    const int n0 = p.num_gambles();
    p.gambles.conservativeResize(n0 + appended, m);
    p.lower_bounds.conservativeResize(n0 + appended, m);
    int at = n0;
    for (int l = 0; l < m; ++l) {
      if (indicator_row[l] >= 0) continue;
      p.gambles.row(at) = Vec::Unit(m, l).transpose();
      for (int k = 0; k < m; ++k) p.lower_bounds(at, k) = (k == l) ? kNoBound : 0.0;
      indicator_row[l] = at;
      std::ostringstream os;
      os << "appended indicator gamble for state " << l << " (off-row bound 0)";
      p.notes.push_back(os.str());
      ++at;
    }
  }

  // Rate non-negativity is structural: an indicator's off-row bound below 0
  // is tightened to 0.
  for (int l = 0; l < m; ++l) {
    const int i = indicator_row[l];
    for (int k = 0; k < m; ++k) {
      if (k == l) continue;
      if (!(p.lower_bounds(i, k) >= 0.0)) {
        std::ostringstream os;
        os << "raised indicator bound for state " << l << " in row " << k << " to 0";
        p.notes.push_back(os.str());
        p.lower_bounds(i, k) = 0.0;
      }
    }
  }
  return p;
}

Problem from_intervals(const Mat& q_lower, const Mat& q_upper) {
  const int m = static_cast<int>(q_lower.rows());
  if (q_lower.cols() != m || q_upper.rows() != m || q_upper.cols() != m)
    throw InvalidModel("interval matrices must be square and equally sized");
  if (!q_lower.allFinite() || !q_upper.allFinite())
    throw InvalidModel("interval matrices must be finite");

  for (int k = 0; k < m; ++k) {
    double lo_sum = 0, hi_sum = 0;
    for (int l = 0; l < m; ++l) {
      const double lo = q_lower(k, l), hi = q_upper(k, l);
      if (lo > hi + tol::row) {
        std::ostringstream os;
        os << "row " << k << ": q_lower exceeds q_upper at column " << l;
        throw InfeasibleModel(os.str());
      }
      if (l != k && hi < -tol::row) {
        std::ostringstream os;
        os << "row " << k << ": negative upper bound on off-diagonal rate " << l;
        throw InfeasibleModel(os.str());
      }
      lo_sum += (l == k) ? lo : std::max(lo, 0.0);
      hi_sum += hi;
    }
    if (lo_sum > tol::row || hi_sum < -tol::row) {
      std::ostringstream os;
      os << "row " << k << ": interval admits no zero-sum rate vector";
      throw InfeasibleModel(os.str());
    }
  }

  // Gambles: 1_l (lower bounds) then -1_l (upper bounds).
  Mat gambles(2 * m, m);
  Mat bounds(2 * m, m);
  for (int l = 0; l < m; ++l) {
    gambles.row(l) = Vec::Unit(m, l).transpose();
    gambles.row(m + l) = -Vec::Unit(m, l).transpose();
    for (int k = 0; k < m; ++k) {
      bounds(l, k) = (l == k) ? q_lower(k, l) : std::max(q_lower(k, l), 0.0);
      bounds(m + l, k) = -q_upper(k, l);
    }
  }
  Problem p = with_indicators(gambles, bounds);
  p.notes.insert(p.notes.begin(), "converted interval-specified rates to gamble form");
  return p;
}

void validate(Problem& p) {
  check_table(p.gambles, p.lower_bounds);
  const int m = p.num_states();
  p.coord_min.resize(m, m);
  p.coord_max.resize(m, m);
  p.point_row.assign(m, 1);

  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      Vec e = Vec::Unit(m, l);
      double lo, hi;
      try {
        lo = minimize_row(p, k, e).value;
        hi = -minimize_row(p, k, -e).value;
      } catch (const InfeasibleModel&) {
        std::ostringstream os;
        os << "row " << k << ": empty rate polytope";
        throw InfeasibleModel(os.str());
      } catch (const UnboundedModel&) {
        std::ostringstream os;
        os << "row " << k << ": unbounded rate polytope (coordinate " << l << ")";
        throw UnboundedModel(os.str());
      }
      p.coord_min(k, l) = lo;
      p.coord_max(k, l) = hi;
      if (hi - lo > 1e-10 * (1.0 + std::abs(hi) + std::abs(lo))) p.point_row[k] = 0;
    }
  }
  p.validated = true;
}

double qset_norm(const Problem& p) {
  const int m = p.num_states();
  double best = 0;
  for (int k = 0; k < m; ++k) {
    const double diag_min = p.validated ? p.coord_min(k, k)
                                        : minimize_row(p, k, Vec::Unit(m, k)).value;
    best = std::max(best, std::abs(diag_min));
  }
  return 2.0 * best;
}

double imprecision_bound(const Problem& p) { return 2.0 * qset_norm(p); }

}  // namespace ictmc
