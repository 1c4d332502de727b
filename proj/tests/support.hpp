#pragma once

#include "ictmc/io.hpp"

#include <random>
#include <string>

namespace ictmc::test {

inline std::string data_path(const std::string& name) {
  return std::string(ICTMC_TEST_DATA_DIR) + "/" + name;
}

inline const Problem& example1() {
  static const Problem p = load_problem(data_path("example1.json"));
  return p;
}

inline const Problem& example2() {
  static const Problem p = load_problem(data_path("example2.json"));
  return p;
}

inline Vec example1_h() { return (Vec(3) << -0.7, 1.7, -1.0).finished(); }

inline Vec random_gamble(std::mt19937& rng, int m, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec g(m);
  for (int i = 0; i < m; ++i) g(i) = u(rng);
  return g;
}

// A feasible point of row k's polytope: off-diagonal rates at their lower
// bounds plus a random share of the slack up to the exit-rate cap.
inline Vec sample_row_point(std::mt19937& rng, const Mat& u, const Vec& c, int k) {
  const int m = static_cast<int>(c.size());
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double base = 0;
  for (int l = 0; l < m; ++l)
    if (l != k) base += u(k, l);
  Vec w = Vec::Zero(m);
  double tw = 0;
  for (int l = 0; l < m; ++l)
    if (l != k) tw += (w(l) = u01(rng));
  const double extra = u01(rng) * (c(k) - base);
  Vec q(m);
  double off = 0;
  for (int l = 0; l < m; ++l) {
    if (l == k) continue;
    q(l) = u(k, l) + (tw > 0 ? w(l) / tw * extra : 0.0);
    off += q(l);
  }
  q(k) = -off;
  return q;
}

// Random valid model: the m indicator gambles with interior-feasible bounds
// (off-diagonal rates >= u(k,l) >= 0, exit rate <= c(k) with slack), plus a
// few generic gambles whose bounds sit strictly below sampled minima so the
// polytope keeps a nonempty interior.
struct RandomModel {
  Problem problem;
  Mat u;  // off-diagonal lower bounds used by the row sampler
  Vec c;  // exit-rate caps
};

inline RandomModel random_model(std::mt19937& rng, int m_max = 4, int extra_max = 4) {
  std::uniform_int_distribution<int> md(2, m_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int m = md(rng);

  Mat u = Mat::Zero(m, m);
  Vec c(m);
  for (int k = 0; k < m; ++k) {
    double s = 0;
    for (int l = 0; l < m; ++l)
      if (l != k) s += (u(k, l) = 0.3 * u01(rng));
    c(k) = s + 0.2 + 1.8 * u01(rng);
  }

  std::uniform_int_distribution<int> ed(0, extra_max);
  const int extra = ed(rng);
  const int n = m + extra;
  Mat F(n, m), L(n, m);
  for (int l = 0; l < m; ++l) {
    F.row(l) = Vec::Unit(m, l).transpose();
    for (int k = 0; k < m; ++k) L(l, k) = (l == k) ? -c(k) : u(k, l);
  }
  for (int i = m; i < n; ++i) {
    const Vec g = random_gamble(rng, m);
    F.row(i) = g.transpose();
    for (int k = 0; k < m; ++k) {
      double lo = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 24; ++s) lo = std::min(lo, g.dot(sample_row_point(rng, u, c, k)));
      L(i, k) = lo - 0.01 - 0.5 * u01(rng);
    }
  }

  RandomModel out{with_indicators(F, L), std::move(u), std::move(c)};
  validate(out.problem);
  return out;
}

inline bool row_feasible(const Problem& p, int k, const Vec& q, double tol = 1e-9) {
  if (std::abs(q.sum()) > tol) return false;
  for (int i = 0; i < p.num_gambles(); ++i) {
    const double b = p.lower_bounds(i, k);
    if (b == kNoBound) continue;
    if (p.gambles.row(i).dot(q) < b - tol * (1 + std::abs(b))) return false;
  }
  return true;
}

inline Mat random_precise_q(std::mt19937& rng, int m, double rate = 2.0) {
  std::uniform_real_distribution<double> u(0.0, rate);
  Mat q = Mat::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    double s = 0;
    for (int l = 0; l < m; ++l)
      if (l != k) s += (q(k, l) = u(rng));
    q(k, k) = -s;
  }
  return q;
}

}  // namespace ictmc::test
