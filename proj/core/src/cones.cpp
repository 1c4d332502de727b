#include "ictmc/cones.hpp"

#include <algorithm>
#include <sstream>

namespace ictmc {

namespace {

Mat columns_with_ones(const Problem& p, const std::vector<int>& idx) {
  const int m = p.num_states();
  Mat c(m, static_cast<int>(idx.size()) + 1);
  for (size_t j = 0; j < idx.size(); ++j) c.col(static_cast<int>(j)) = p.gambles.row(idx[j]).transpose();
  c.col(static_cast<int>(idx.size())) = Vec::Ones(m);
  return c;
}

int rank_of(const Mat& a) {
  return static_cast<int>(a.colPivHouseholderQr().rank());
}

}  // namespace

std::vector<int> active_indices(const Problem& p, int k, const Vec& q) {
  std::vector<int> out;
  for (int i = 0; i < p.num_gambles(); ++i) {
    const double b = p.lower_bounds(i, k);
    if (b == kNoBound) continue;
    if (std::abs(q.dot(p.gambles.row(i).transpose()) - b) <= tol::active(b)) out.push_back(i);
  }
  if (rank_of(columns_with_ones(p, out)) < p.num_states()) {
    std::ostringstream os;
    os << "row " << k << ": active set spans rank " << rank_of(columns_with_ones(p, out))
       << " < " << p.num_states() << " (vertex expected)";
    throw RankDeficientActiveSet(os.str());
  }
  return out;
}

ReducedCombination reduce_to_independent(const Problem& p, const std::vector<int>& indices,
                                         Vec coeffs, double constant, const Vec& target) {
  std::vector<int> idx = indices;
  if (coeffs.size() != static_cast<Eigen::Index>(idx.size()))
    throw InvalidModel("coefficient/index length mismatch");

  for (int guard = 0; guard <= p.num_gambles() + 1; ++guard) {
    const Mat c = columns_with_ones(p, idx);
    Eigen::FullPivLU<Mat> lu(c);
    if (lu.rank() == c.cols()) {
      ReducedCombination out;
      out.indices = idx;
      out.coeffs = coeffs;
      out.constant = constant;
      return out;
    }

    // Null direction over the columns; orient it so stepping zeroes a
    // gamble coefficient while the others stay non-negative.
    Vec beta = lu.kernel().col(0);
    const int n = static_cast<int>(idx.size());
    const double beta_scale = max_norm(beta);
    if (beta_scale <= 0) throw NumericalError("degenerate null direction");
    bool has_negative = false;
    for (int j = 0; j < n; ++j)
      if (beta(j) < -1e-12 * beta_scale) has_negative = true;
    if (!has_negative) beta = -beta;

    double step = std::numeric_limits<double>::infinity();
    int drop = -1;
    for (int j = 0; j < n; ++j) {
      if (beta(j) >= -1e-12 * beta_scale) continue;
      const double s = coeffs(j) / (-beta(j));
      if (s < step) {
        step = s;
        drop = j;
      }
    }
    if (drop < 0) throw NumericalError("null direction with no negative gamble component");

    for (int j = 0; j < n; ++j) coeffs(j) = std::max(coeffs(j) + step * beta(j), 0.0);
    constant += step * beta(n);
    coeffs(drop) = 0;
    idx.erase(idx.begin() + drop);
    Vec trimmed(n - 1);
    for (int j = 0, at = 0; j < n; ++j)
      if (j != drop) trimmed(at++) = coeffs(j);
    coeffs = trimmed;
  }
  throw NumericalError("dependent set not reducible");
}

ConeBasis complete_to_basis(const Problem& p, int row, const std::vector<int>& subset,
                            const std::vector<int>& pool, const Vec& h) {
  const int m = p.num_states();
  std::vector<int> cols = subset;
  if (rank_of(columns_with_ones(p, cols)) < static_cast<int>(cols.size()) + 1)
    throw RankDeficientActiveSet("starting subset is not independent with the constant");

  for (int i : pool) {
    if (static_cast<int>(cols.size()) == m - 1) break;
    if (std::find(cols.begin(), cols.end(), i) != cols.end()) continue;
    std::vector<int> trial = cols;
    trial.push_back(i);
    if (rank_of(columns_with_ones(p, trial)) == static_cast<int>(trial.size()) + 1)
      cols = std::move(trial);
  }
  if (static_cast<int>(cols.size()) != m - 1) {
    std::ostringstream os;
    os << "row " << row << ": active gambles complete to rank " << cols.size() + 1
       << " < " << m;
    throw RankDeficientActiveSet(os.str());
  }

  ConeBasis basis;
  basis.row = row;
  basis.indices = cols;
  basis.basis_matrix.resize(m, m);
  basis.basis_matrix.col(0) = Vec::Ones(m);
  for (int j = 0; j < m - 1; ++j)
    basis.basis_matrix.col(j + 1) = p.gambles.row(cols[j]).transpose();

  Eigen::PartialPivLU<Mat> lu(basis.basis_matrix);
  basis.inverse = lu.inverse();
  if (!basis.inverse.allFinite())
    throw IllConditionedBasis("basis matrix is numerically singular");

  auto one_norm = [](const Mat& a) {
    double best = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
    return best;
  };
  basis.cond = one_norm(basis.basis_matrix) * one_norm(basis.inverse);
  if (basis.cond > tol::cond_max) {
    std::ostringstream os;
    os << "row " << row << ": basis condition estimate " << basis.cond;
    throw IllConditionedBasis(os.str());
  }
  basis.alpha0 = lu.solve(h);
  return basis;
}

Mat change_of_basis(const Mat& Q, const ConeBasis& basis) {
  if (basis.cond > tol::cond_max)
    throw IllConditionedBasis("basis condition estimate above ceiling");
  return basis.inverse * Q * basis.basis_matrix;
}

ConeFamily dedup_cones(const std::vector<ConeBasis>& per_row) {
  ConeFamily fam;
  std::vector<std::vector<int>> keys;
  for (const ConeBasis& b : per_row) {
    std::vector<int> key = b.indices;
    std::sort(key.begin(), key.end());
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(std::move(key));
      fam.cones.push_back(b);
      fam.rows.push_back({b.row});
    } else {
      fam.rows[static_cast<size_t>(it - keys.begin())].push_back(b.row);
    }
  }
  return fam;
}

}  // namespace ictmc
