#include "safefw/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safefw/error.hpp"

namespace safefw::lp {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

enum class PhaseResult { optimal, unbounded };

// Standard-form tableau for  A (u - v) + s = b,  u, v, s >= 0, with artificial
// columns for rows whose right-hand side had to be negated. The last row holds
// reduced costs; the last column holds basic values (and -objective).
class Tableau {
 public:
  Tableau(const LpProblem& p, const SimplexOptions& opt) : opt_(opt) {
    d_ = static_cast<int>(p.A.cols());
    m_ = static_cast<int>(p.A.rows());
    int artificials = 0;
    for (int i = 0; i < m_; ++i) {
      if (p.b(i) < 0.0) ++artificials;
    }
    first_art_ = 2 * d_ + m_;
    cols_ = first_art_ + artificials;
    rhs_ = cols_;
    t_ = Matrix::Zero(m_ + 1, cols_ + 1);
    basis_.assign(m_, -1);

    int next_art = first_art_;
    for (int i = 0; i < m_; ++i) {
      const double sign = p.b(i) < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < d_; ++j) {
        t_(i, j) = sign * p.A(i, j);
        t_(i, d_ + j) = -sign * p.A(i, j);
      }
      t_(i, 2 * d_ + i) = sign;
      t_(i, rhs_) = sign * p.b(i);
      if (sign < 0.0) {
        t_(i, next_art) = 1.0;
        basis_[i] = next_art++;
      } else {
        basis_[i] = 2 * d_ + i;
      }
    }
    blocked_.assign(cols_, false);
    max_pivots_ = opt.max_pivots > 0 ? opt.max_pivots : 50 * (m_ + cols_) + 1000;
    b_scale_ = std::max(1.0, p.b.size() > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0);
  }

  bool has_artificials() const { return cols_ > first_art_; }

  PhaseResult phase_one() {
    t_.row(m_).setZero();
    for (int j = first_art_; j < cols_; ++j) t_(m_, j) = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= first_art_) t_.row(m_) -= t_.row(i);
    }
    return iterate();
  }

  double phase_one_infeasibility() const { return -t_(m_, rhs_); }
  double b_scale() const { return b_scale_; }

  // Pivots remaining artificial variables out of the basis after a successful
  // phase one; rows that cannot be cleared are redundant and left in place.
  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_art_) continue;
      int best = -1;
      double best_abs = opt_.pivot_tol;
      for (int j = 0; j < first_art_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);
    }
    for (int j = first_art_; j < cols_; ++j) blocked_[j] = true;
  }

  PhaseResult phase_two(const Vector& c) {
    t_.row(m_).setZero();
    for (int j = 0; j < d_; ++j) {
      t_(m_, j) = c(j);
      t_(m_, d_ + j) = -c(j);
    }
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_of(basis_[i], c);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    return iterate();
  }

  Vector primal_point() const {
    Vector x = Vector::Zero(d_);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < d_) {
        x(j) += t_(i, rhs_);
      } else if (j < 2 * d_) {
        x(j - d_) -= t_(i, rhs_);
      }
    }
    return x;
  }

  int pivots() const { return pivots_; }

 private:
  double cost_of(int column, const Vector& c) const {
    if (column < d_) return c(column);
    if (column < 2 * d_) return -c(column - d_);
    return 0.0;
  }

  PhaseResult iterate() {
    while (true) {
      // Bland: lowest-index improving column.
      int enter = -1;
      for (int j = 0; j < cols_; ++j) {
        if (blocked_[j]) continue;
        if (t_(m_, j) < -opt_.optimality_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return PhaseResult::optimal;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = std::max(t_(i, rhs_), 0.0) / a;
        if (leave < 0) {
          best_ratio = ratio;
          leave = i;
          continue;
        }
        const double tie = 1e-12 * std::max(1.0, best_ratio);
        if (ratio < best_ratio - tie ||
            (std::abs(ratio - best_ratio) <= tie && basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return PhaseResult::unbounded;
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    if (++pivots_ > max_pivots_) {
      std::ostringstream os;
      os << "simplex stalled: pivot cap " << max_pivots_ << " reached (m=" << m_ << ", d=" << d_
         << ")";
      throw NumericalError(os.str());
    }
    t_.row(row) /= t_(row, col);
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  SimplexOptions opt_;
  int d_ = 0;
  int m_ = 0;
  int cols_ = 0;
  int first_art_ = 0;
  int rhs_ = 0;
  int pivots_ = 0;
  int max_pivots_ = 0;
  double b_scale_ = 1.0;
  Matrix t_;
  std::vector<int> basis_;
  std::vector<bool> blocked_;
};

std::vector<int> tight_rows(const Matrix& A, const Vector& b, const Vector& x, double tol) {
  std::vector<int> rows;
  const Vector slack = b - A * x;
  for (int i = 0; i < slack.size(); ++i) {
    if (std::abs(slack(i)) <= tol * std::max(1.0, std::abs(b(i)))) rows.push_back(i);
  }
  return rows;
}

// Re-solves the tight rows directly so the returned vertex carries no
// accumulated tableau round-off.
Vector polish_vertex(const LpProblem& p, const Vector& x, double feas_tol) {
  const auto rows = tight_rows(p.A, p.b, x, 1e-7);
  const int d = static_cast<int>(p.A.cols());
  if (static_cast<int>(rows.size()) < d) return x;
  Matrix Ab(rows.size(), d);
  Vector bb(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Ab.row(k) = p.A.row(rows[k]);
    bb(k) = p.b(rows[k]);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(Ab);
  if (qr.rank() < d) return x;
  const Vector polished = qr.solve(bb);
  const double viol_old = (p.A * x - p.b).maxCoeff();
  const double viol_new = (p.A * polished - p.b).maxCoeff();
  if (viol_new > std::max(viol_old, feas_tol)) return x;
  if (p.c.dot(polished) > p.c.dot(x) + 1e-9 * std::max(1.0, std::abs(p.c.dot(x)))) return x;
  return polished;
}

}  // namespace

LpSolution solve(const LpProblem& p, const SimplexOptions& options) {
  if (p.A.rows() != p.b.size() || p.A.cols() != p.c.size()) {
    throw DimensionError("lp::solve: inconsistent dimensions of c, A, b");
  }
  LpSolution sol;
  const int d = static_cast<int>(p.A.cols());

  if (p.A.rows() == 0) {
    if (p.c.isZero(0.0)) {
      sol.status = LpStatus::optimal;
      sol.point = Vector::Zero(d);
      return sol;
    }
    sol.status = LpStatus::unbounded;
    return sol;
  }

  Tableau tab(p, options);
  if (tab.has_artificials()) {
    tab.phase_one();
    if (tab.phase_one_infeasibility() > options.feasibility_tol * tab.b_scale()) {
      sol.status = LpStatus::infeasible;
      sol.pivots = tab.pivots();
      return sol;
    }
    tab.expel_artificials();
  }
  const auto result = tab.phase_two(p.c);
  sol.pivots = tab.pivots();
  if (result == PhaseResult::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  sol.status = LpStatus::optimal;
  sol.point = polish_vertex(p, tab.primal_point(), options.feasibility_tol);
  sol.value = p.c.dot(sol.point);
  sol.active_set = tight_rows(p.A, p.b, sol.point, options.feasibility_tol);
  return sol;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    if (result > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

std::vector<ActiveSetVertex> enumerate_active_sets(const Matrix& A, const Vector& b,
                                                   std::size_t max_subsets,
                                                   double feasibility_tol) {
  if (A.rows() != b.size()) throw DimensionError("enumerate_active_sets: A and b disagree");
  const int m = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  std::vector<ActiveSetVertex> out;
  if (d == 0 || m < d) return out;

  const std::size_t subsets = binomial(m, d);
  if (subsets > max_subsets) {
    std::ostringstream os;
    os << "active-set enumeration needs " << subsets << " subsets (cap " << max_subsets
       << "); supply analytic geometry overrides instead";
    throw PreconditionError(os.str());
  }

  std::vector<int> idx(d);
  for (int k = 0; k < d; ++k) idx[k] = k;
  Matrix AB(d, d);
  Vector bB(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      AB.row(k) = A.row(idx[k]);
      bB(k) = b(idx[k]);
    }
    Eigen::JacobiSVD<Matrix> svd(AB);
    const double smin = svd.singularValues()(d - 1);
    const double smax = svd.singularValues()(0);
    if (smin > 1e-12 * std::max(1.0, smax)) {
      const Vector v = AB.partialPivLu().solve(bB);
      const Vector viol = A * v - b;
      bool feasible = true;
      for (int i = 0; i < m; ++i) {
        if (viol(i) > feasibility_tol * std::max(1.0, std::abs(b(i)))) {
          feasible = false;
          break;
        }
      }
      if (feasible) out.push_back({idx, v, smin});
    }
    // Next combination in lexicographic order.
    int k = d - 1;
    while (k >= 0 && idx[k] == m - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<Vector> enumerate_vertices(const LpProblem& p) {
  if (p.A.rows() > 16 || p.A.cols() > 6) {
    throw PreconditionError("enumerate_vertices: limited to m <= 16 and d <= 6");
  }
  const auto sets = enumerate_active_sets(p.A, p.b, binomial(16, 8));
  std::vector<Vector> vertices;
  for (const auto& s : sets) {
    const bool seen = std::any_of(vertices.begin(), vertices.end(), [&](const Vector& v) {
      return (v - s.point).cwiseAbs().maxCoeff() <= 1e-9;
    });
    if (!seen) vertices.push_back(s.point);
  }
  return vertices;
}

}  // namespace safefw::lp
