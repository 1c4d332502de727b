#include "ictmc/solver.hpp"

#include <chrono>
#include <sstream>

namespace ictmc {

namespace {

struct RowSelection {
  ConeBasis basis;
  Vec vertex;
};

// Builds the cone for row k at h.  Among the minimizing vertices (the row
// LP can be degenerate) we want the one whose cone also contains where the
// trajectory is headed, so the LP objective is perturbed along the current
// velocity hdot and the perturbation is relaxed toward zero until a vertex
// passes all gates.  tau = 0 always yields a sound (if short-lived) basis,
// so failure here means the active-set geometry is genuinely broken.
bool build_row_cone(const Problem& p, int k, const Vec& h, const Vec& hdot, double value_k,
                    LpStats* stats, RowSelection& out) {
  const int m = p.num_states();
  const double hs = 1.0 + max_norm(h);
  const double tau0 = 1e-3 * hs / (1.0 + max_norm(hdot));
  const double taus[] = {tau0, tau0 / 8, tau0 / 64, tau0 / 512, 0.0};

  for (double tau : taus) {
    const Vec target = h + tau * hdot;
    LpSolution sol;
    try {
      sol = minimize_row(p, k, target, stats);
    } catch (const Error&) {
      continue;
    }
    // The look-ahead vertex must still be optimal for h itself.
    if (sol.vertex.dot(h) > value_k + 1e-7 * (1.0 + std::abs(value_k))) continue;

    std::vector<int> act;
    try {
      act = active_indices(p, k, sol.vertex);
    } catch (const RankDeficientActiveSet&) {
      continue;
    }

    // Decompose the look-ahead target, not h: its support points the basis
    // at the gambles the trajectory is about to lean on.
    Mat cand(m, static_cast<int>(act.size()));
    for (size_t j = 0; j < act.size(); ++j)
      cand.col(static_cast<int>(j)) = p.gambles.row(act[j]).transpose();
    NonnegCombination comb;
    try {
      comb = nonneg_combination(cand, target, stats);
    } catch (const NotInCone&) {
      continue;
    }

    const double dust = 1e-13 * (1.0 + max_norm(target));
    std::vector<int> support;
    std::vector<double> sup_vals;
    for (size_t j = 0; j < act.size(); ++j) {
      if (comb.coeffs(static_cast<int>(j)) > dust) {
        support.push_back(act[j]);
        sup_vals.push_back(comb.coeffs(static_cast<int>(j)));
      }
    }
    Vec sup_coeffs = Eigen::Map<Vec>(sup_vals.data(), static_cast<Eigen::Index>(sup_vals.size()));

    ConeBasis basis;
    try {
      ReducedCombination red =
          reduce_to_independent(p, support, sup_coeffs, comb.constant, target);
      basis = complete_to_basis(p, k, red.indices, act, h);
    } catch (const Error&) {
      continue;
    }

    bool ok = true;
    for (int j = 1; j < m; ++j) {
      if (std::abs(basis.alpha0(j)) <= 1e-12 * hs)
        basis.alpha0(j) = 0;
      else if (basis.alpha0(j) < -1e-9 * hs) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (max_norm(basis.basis_matrix * basis.alpha0 - h) > 1e-7 * hs) continue;

    out.basis = std::move(basis);
    out.vertex = sol.vertex;
    return true;
  }
  return false;
}

}  // namespace

SolveReport solve_adaptive(const Problem& p, const Vec& h0, double T, double E,
                           const AdaptiveOptions& opts) {
  const int m = p.num_states();
  if (!p.validated) throw InvalidModel("problem must be validated before solving");
  if (h0.size() != m) throw InvalidModel("gamble dimension mismatch");
  if (T < 0 || std::isnan(T)) throw InvalidModel("horizon must be non-negative");
  if (!(E > 0)) throw InvalidModel("error budget must be positive");

  const auto t_begin = std::chrono::steady_clock::now();
  LpStats stats;
  SolveReport rep;
  rep.h_T = h0;
  if (T == 0) {
    rep.notes.push_back("zero horizon: input echoed");
    return rep;
  }

  const double nq = qset_norm(p);
  const double iota = 2.0 * nq;
  const double dt_min_param = opts.dt_min > 0 ? opts.dt_min : 0.01 * T;
  const bool debug = opts.debug_invariants;
  double dbg_min_coeff = std::numeric_limits<double>::infinity();
  double dbg_gap = 0;

  Vec h = h0;
  double t = 0;
  double e_rem = E;

  auto finish = [&](SolveReport& r) {
    r.lp_calls = stats.calls;
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    if (debug) {
      r.debug_min_coeff = std::isfinite(dbg_min_coeff) ? dbg_min_coeff : 0.0;
      r.debug_max_operator_gap = dbg_gap;
    }
  };

  while (t < T) {
    const double rem = T - t;
    LowerApply la = lower_operator_apply(p, h, &stats);
    Mat Q = la.Q;

    std::vector<ConeBasis> per_row;
    per_row.reserve(m);
    for (int k = 0; k < m; ++k) {
      if (p.point_row[k]) continue;  // a forced row minimizes every gamble
      RowSelection sel;
      if (!build_row_cone(p, k, h, la.values, la.values(k), &stats, sel)) {
        std::ostringstream os;
        os << "no usable cone basis for row " << k << " at t = " << t;
        throw NumericalError(os.str());
      }
      Q.row(k) = sel.vertex.transpose();
      per_row.push_back(std::move(sel.basis));
    }

    ConeFamily fam = dedup_cones(per_row);
    std::vector<Mat> qjs;
    qjs.reserve(fam.cones.size());
    for (const ConeBasis& cb : fam.cones) qjs.push_back(change_of_basis(Q, cb));

    double dt = rem;
    for (size_t i = 0; i < fam.cones.size(); ++i)
      dt = std::min(dt, initial_interval_guess(fam.cones[i], qjs[i], rem, dt_min_param));

    const double floor = std::max(1e-9, rem * 1e-6);
    std::vector<PartialSumTrace> traces;
    double eps = 0, err = 0;
    int halvings = 0;
    for (;;) {
      traces.clear();
      for (size_t i = 0; i < fam.cones.size(); ++i)
        traces.push_back(partial_sum_trace(fam.cones[i], qjs[i], dt));
      eps = estimate_epsilon(traces);
      err = step_error_bound(eps, dt, nq, iota);
      if (err <= e_rem * dt / rem) break;
      if (dt <= floor * (1 + 1e-12)) {
        std::ostringstream os;
        os << "error budget exhausted at t = " << t << " (dt floor " << floor
           << ", step error " << err << ")";
        rep.h_T = h;
        rep.notes.push_back(os.str());
        finish(rep);
        throw BudgetExhausted(os.str(), rep);
      }
      dt = std::max(0.5 * dt, floor);
      ++halvings;
    }

    if (debug) {
      // Interior-time spot checks: partial sums must stay (essentially)
      // non-negative inside an accepted interval, and the frozen matrix must
      // keep minimizing along the whole partial-sum path.
      for (int j = 1; j <= 20; ++j) {
        const double ti = dt * j / 21.0;
        for (size_t i = 0; i < fam.cones.size(); ++i) {
          const PartialSumTrace tr = partial_sum_trace(fam.cones[i], qjs[i], ti);
          if (tr.overflow) continue;
          for (const Vec& alpha : tr.partial)
            for (int c = 1; c < m; ++c) dbg_min_coeff = std::min(dbg_min_coeff, alpha(c));
          const Vec g = fam.cones[i].basis_matrix * tr.partial.back();
          const Vec low = lower_operator_apply(p, g, &stats).values;
          dbg_gap = std::max(dbg_gap, max_norm(Q * g - low));
        }
      }
    }

    int r_used = 0;
    for (const PartialSumTrace& tr : traces) r_used = std::max(r_used, tr.r_used);

    h = matrix_exponential(Q, dt) * h;
    StepCertificate sc;
    sc.t_start = t;
    sc.dt = dt;
    sc.Q = Q;
    sc.epsilon = eps;
    sc.step_error = err;
    sc.exact = eps <= tol::cone;
    sc.r_used = r_used;
    sc.halvings = halvings;
    rep.steps.push_back(std::move(sc));
    rep.max_err += err;
    e_rem -= err;
    t = (dt >= rem) ? T : t + dt;
  }

  rep.h_T = h;
  finish(rep);
  return rep;
}

GridReport solve_uniform_exp(const Problem& p, const Vec& h0, double T, long n) {
  if (!p.validated) throw InvalidModel("problem must be validated before solving");
  if (n < 1) throw InvalidModel("need at least one step");
  LpStats stats;
  GridReport rep;
  rep.variant = "exp";
  rep.n = n;
  rep.h_T = h0;
  const double nq = qset_norm(p);
  rep.bound = n * worst_case_step_error(T / n, nq, center_seminorm(h0));
  if (T == 0) return rep;

  const double dt = T / n;
  Vec h = h0;
  for (long i = 0; i < n; ++i) {
    LowerApply la = lower_operator_apply(p, h, &stats);
    h = matrix_exponential(la.Q, dt) * h;
  }
  rep.h_T = h;
  rep.lp_calls = stats.calls;
  return rep;
}

GridReport solve_uniform_euler(const Problem& p, const Vec& h0, double T, long n) {
  if (!p.validated) throw InvalidModel("problem must be validated before solving");
  if (n < 1) throw InvalidModel("need at least one step");
  const double nq = qset_norm(p);
  // dt·(max exit rate) <= 1 keeps I + dt·Q substochastic-like; the exit rate
  // is qnorm/2 by construction of the norm.
  if (2.0 * n < T * nq) {
    std::ostringstream os;
    os << "Euler grid too coarse: need n >= " << T * nq / 2.0;
    throw StepTooCoarse(os.str());
  }
  LpStats stats;
  GridReport rep;
  rep.variant = "euler";
  rep.n = n;
  rep.h_T = h0;
  const double dt = T / n;
  rep.bound = n * dt * dt * center_seminorm(h0) * nq * nq;
  if (T == 0) return rep;

  Vec h = h0;
  for (long i = 0; i < n; ++i) {
    LowerApply la = lower_operator_apply(p, h, &stats);
    h += dt * la.values;
  }
  rep.h_T = h;
  rep.lp_calls = stats.calls;
  return rep;
}

long required_steps_uniform(double T, double qnorm, double h_norm, double E) {
  if (!(T > 0) || !(E > 0)) throw InvalidModel("horizon and budget must be positive");
  auto f = [&](long n) {
    const double x = T * qnorm / n;
    return 2.0 * n * h_norm * (1.0 - std::exp(x) * (1.0 - x));
  };
  if (h_norm <= 0 || qnorm <= 0 || f(1) <= E) return 1;
  long hi = 1;
  while (f(hi) > E) {
    if (hi > (1L << 60)) throw NumericalError("uniform step count overflow");
    hi *= 2;
  }
  long lo = hi / 2;  // f(lo) > E, f(hi) <= E
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (f(mid) <= E ? hi : lo) = mid;
  }
  return hi;
}

TransitionBounds transition_bounds(const Problem& p, int i, double T, double E) {
  const int m = p.num_states();
  if (i < 0 || i >= m) throw InvalidModel("state index out of range");
  TransitionBounds out;
  out.state = i;
  out.T = T;
  if (T == 0) {
    out.lower = out.upper = Vec::Unit(m, i);
    out.lower_seminorm = out.upper_seminorm = variational_seminorm(out.lower);
    out.converged = out.lower_seminorm < 2 * E;
    return out;
  }

  const Vec ind = Vec::Unit(m, i);
  SolveReport lo = solve_adaptive(p, ind, T, E);
  SolveReport up = solve_adaptive(p, -ind, T, E);

  out.lower = lo.h_T;
  out.upper = -up.h_T;
  out.lower_err = lo.max_err;
  out.upper_err = up.max_err;
  out.lower_seminorm = variational_seminorm(lo.h_T);
  out.upper_seminorm = variational_seminorm(up.h_T);
  out.lower_steps = static_cast<long>(lo.steps.size());
  out.upper_steps = static_cast<long>(up.steps.size());
  out.lp_calls = lo.lp_calls + up.lp_calls;
  out.converged = std::max(out.lower_seminorm, out.upper_seminorm) < 2 * E;
  return out;
}

}  // namespace ictmc
