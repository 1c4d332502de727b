#include "ictmc/expstep.hpp"

#include <cmath>

namespace ictmc {

Mat matrix_exponential(const Mat& Q, double t) {
  const int m = static_cast<int>(Q.rows());
  Mat A = t * Q;
  double nrm = operator_norm(A);
  int s = 0;
  while (nrm > 0.5 && s < 64) {
    nrm *= 0.5;
    ++s;
  }
  A /= std::pow(2.0, s);

  Mat sum = Mat::Identity(m, m);
  Mat term = Mat::Identity(m, m);
  for (int j = 1; j <= 60; ++j) {
    term = (A * term) / j;
    sum += term;
    if (operator_norm(term) <= 1e-16 * operator_norm(sum)) break;
  }
  for (int j = 0; j < s; ++j) sum = sum * sum;
  return sum;
}

namespace {

// log of the series tail bound  nu^{r+1} T^{r+1} / (r+1)! · e^{T·nu} · ||a0||
double log_tail(double x, int r, double a0norm) {
  if (x <= 0 || a0norm <= 0) return -std::numeric_limits<double>::infinity();
  return (r + 1) * std::log(x) - std::lgamma(r + 2.0) + x + std::log(a0norm);
}

}  // namespace

PartialSumTrace partial_sum_trace(const ConeBasis& basis, const Mat& QJ, double T) {
  const int m = static_cast<int>(basis.alpha0.size());
  PartialSumTrace tr;
  tr.horizon = T;

  const double a0norm = max_norm(basis.alpha0);
  const double x = T * operator_norm(QJ);
  const double tail_tol = 1e-12 * a0norm;

  // Center seminorms of the non-constant basis columns weight how strongly
  // a unit of negative coefficient mass shows up back in gamble space.
  double colsum = 0;
  for (int j = 1; j < m; ++j) colsum += center_seminorm(basis.basis_matrix.col(j));

  auto neg_eps = [&](const Vec& alpha) {
    Vec np = Vec::Zero(m);
    for (int j = 1; j < m; ++j) np(j) = std::max(-alpha(j), 0.0);
    if (np.isZero(0.0)) return 0.0;
    return center_seminorm(basis.basis_matrix * np);
  };

  Vec term = basis.alpha0;
  Vec cur = basis.alpha0;
  tr.partial.push_back(cur);
  tr.eps_raw = neg_eps(cur);
  tr.r_used = 0;

  double tail = std::exp(log_tail(x, 0, a0norm));
  if (a0norm > 0 && !(tail < tail_tol)) {
    for (int r = 1; r <= tol::r_cap; ++r) {
      term = (T / r) * (QJ * term);
      cur += term;
      if (!cur.allFinite()) {
        tr.overflow = true;
        break;
      }
      tr.partial.push_back(cur);
      tr.eps_raw = std::max(tr.eps_raw, neg_eps(cur));
      tr.r_used = r;
      tail = std::exp(log_tail(x, r, a0norm));
      if (tail < tail_tol) break;
      if (r == tol::r_cap) tr.overflow = true;
    }
  } else {
    tail = 0;
  }

  if (tr.overflow) {
    tr.epsilon = std::numeric_limits<double>::infinity();
    return tr;
  }
  tr.tail_margin = tail * colsum;
  tr.epsilon = tr.eps_raw + tr.tail_margin;
  tr.limit = matrix_exponential(QJ, T) * basis.alpha0;
  return tr;
}

double estimate_epsilon(const std::vector<PartialSumTrace>& traces) {
  double eps = 0;
  for (const PartialSumTrace& tr : traces) {
    if (tr.overflow) return std::numeric_limits<double>::infinity();
    eps = std::max(eps, tr.epsilon);
  }
  return eps;
}

double step_error_bound(double epsilon, double dt, double qnorm, double iota_bound) {
  if (epsilon == 0 || dt == 0) return 0;
  if (qnorm <= 0) return iota_bound * dt * epsilon;  // (e^{q·dt}-1)/q -> dt
  return std::expm1(qnorm * dt) * (iota_bound / qnorm) * epsilon;
}

double worst_case_step_error(double dt, double qnorm, double h_center) {
  const double x = dt * qnorm;
  return 2.0 * h_center * (1.0 - std::exp(x) * (1.0 - x));
}

double initial_interval_guess(const ConeBasis& basis, const Mat& QJ, double remaining,
                              double dt_min) {
  const int m = static_cast<int>(basis.alpha0.size());
  const Vec v = QJ * basis.alpha0;
  const double vtol = 1e-9 * (1.0 + max_norm(v));
  const double atol = 1e-12 * (1.0 + max_norm(basis.alpha0));

  bool zero_negative = false;
  double t_linear = std::numeric_limits<double>::infinity();
  for (int j = 1; j < m; ++j) {
    if (v(j) >= -vtol) continue;
    if (basis.alpha0(j) <= atol)
      zero_negative = true;
    else
      t_linear = std::min(t_linear, basis.alpha0(j) / (-v(j)));
  }

  const double floor = std::min(dt_min, remaining);
  if (zero_negative) return floor;
  if (!std::isfinite(t_linear)) return remaining;
  // 0.99 keeps the certificate away from the exact linear breakpoint.
  return std::min(std::max(0.99 * std::min(t_linear, remaining), floor), remaining);
}

}  // namespace ictmc
