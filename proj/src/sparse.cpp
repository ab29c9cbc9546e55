#include "dcell/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dcell {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

SparseSymmetricMatrix SparseSymmetricMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n) {
      throw std::out_of_range("triplet index outside matrix dimension");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseSymmetricMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const auto& t = triplets[k];
    double v = 0.0;
    std::size_t e = k;
    for (; e < triplets.size() && triplets[e].row == t.row && triplets[e].col == t.col; ++e) v += triplets[e].value;
    m.col_idx_.push_back(t.col);
    m.values_.push_back(v);
    ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    k = e;
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

SparseSymmetricMatrix SparseSymmetricMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
  return from_triplets(n, std::move(t));
}

void SparseSymmetricMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("matrix-vector dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[static_cast<std::size_t>(col_idx_[k])];
    y[i] = s;
  }
}

std::vector<double> SparseSymmetricMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseSymmetricMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  return dot(x, apply(y));
}

double SparseSymmetricMatrix::at(int i, int j) const {
  const auto ri = static_cast<std::size_t>(i);
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[ri]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[ri + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> SparseSymmetricMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
  return d;
}

double SparseSymmetricMatrix::symmetry_defect() const {
  double max_abs = 0.0;
  double max_diff = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      max_abs = std::max(max_abs, std::abs(values_[k]));
      max_diff = std::max(max_diff, std::abs(values_[k] - at(col_idx_[k], static_cast<int>(i))));
    }
  }
  return max_abs > 0.0 ? max_diff / max_abs : 0.0;
}

SparseSymmetricMatrix linear_combination(double alpha, const SparseSymmetricMatrix& a, double beta,
                                         const SparseSymmetricMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("linear_combination: dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nonzeros() + b.nonzeros());
  auto push = [&t](double s, const SparseSymmetricMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
        t.push_back({static_cast<int>(i), m.col_idx()[k], s * m.values()[k]});
      }
    }
  };
  push(alpha, a);
  push(beta, b);
  return SparseSymmetricMatrix::from_triplets(a.size(), std::move(t));
}

PcgSolver::PcgSolver(const SparseSymmetricMatrix& a, double rel_tol, std::size_t max_iterations)
    : a_(&a), rel_tol_(rel_tol), max_iterations_(max_iterations == 0 ? 10 * a.size() : max_iterations) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("rel_tol must lie in (0, 1)");
  inv_diag_ = a.diagonal();
  for (double& d : inv_diag_) {
    if (!(d > 0.0)) throw SolverError("matrix has a non-positive diagonal entry; not SPD", 0, 0.0);
    d = 1.0 / d;
  }
}

std::vector<double> PcgSolver::solve(std::span<const double> b, std::span<const double> guess,
                                     SolveStats* stats) const {
  const std::size_t n = a_->size();
  if (b.size() != n) throw std::invalid_argument("right-hand side dimension mismatch");
  std::vector<double> x(n, 0.0);
  if (!guess.empty()) {
    if (guess.size() != n) throw std::invalid_argument("initial guess dimension mismatch");
    std::copy(guess.begin(), guess.end(), x.begin());
  }
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {};
    return std::vector<double>(n, 0.0);
  }
  const double target = rel_tol_ * bnorm;

  std::vector<double> r(n);
  a_->multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = z[i] = inv_diag_[i] * r[i];
  double rz = dot(r, z);
  double rnorm = norm2(r);
  std::size_t it = 0;
  while (rnorm > target) {
    if (it >= max_iterations_) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "PCG did not converge in %zu iterations (relative residual %.3e, target %.3e)",
                    it, rnorm / bnorm, rel_tol_);
      throw SolverError(msg, it, rnorm / bnorm);
    }
    a_->multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("PCG breakdown: matrix is not positive definite", it, rnorm / bnorm);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    // Replace the recursive residual periodically to avoid drift.
    if (it % 50 == 0) {
      a_->multiply(x, r);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = norm2(r);
    if (rnorm <= target) {
      // confirm against the true residual before returning
      a_->multiply(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      rnorm = norm2(r);
      if (rnorm > target) {
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] = inv_diag_[i] * r[i];
        rz = dot(r, z);
      }
    }
  }
  if (stats) *stats = {it, rnorm / bnorm};
  return x;
}

std::vector<double> solve_spd(const SparseSymmetricMatrix& a, std::span<const double> b, double rel_tol) {
  return PcgSolver(a, rel_tol).solve(b);
}

}  // namespace dcell
