#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcell {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row storage of a symmetric matrix (both triangles stored).
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;

  /// Duplicate entries are summed in insertion order, so assembly is
  /// bit-reproducible for a fixed triplet sequence.
  static SparseSymmetricMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
  static SparseSymmetricMatrix identity(std::size_t n);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
  [[nodiscard]] std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  [[nodiscard]] std::span<const int> col_idx() const { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  void multiply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  [[nodiscard]] double bilinear(std::span<const double> x, std::span<const double> y) const;
  [[nodiscard]] double at(int i, int j) const;
  [[nodiscard]] std::vector<double> diagonal() const;
  /// max |a_ij - a_ji| / max |a_ij|
  [[nodiscard]] double symmetry_defect() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// alpha * A + beta * B on the union of both sparsity patterns.
SparseSymmetricMatrix linear_combination(double alpha, const SparseSymmetricMatrix& a, double beta,
                                         const SparseSymmetricMatrix& b);

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t iterations, double relative_residual)
      : std::runtime_error(what), iterations_(iterations), relative_residual_(relative_residual) {}
  [[nodiscard]] std::size_t iterations() const { return iterations_; }
  [[nodiscard]] double relative_residual() const { return relative_residual_; }

 private:
  std::size_t iterations_;
  double relative_residual_;
};

struct SolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for an SPD matrix. The inverse
/// diagonal is computed once, so one solver instance serves every time step
/// of a fixed-step scheme.
class PcgSolver {
 public:
  explicit PcgSolver(const SparseSymmetricMatrix& a, double rel_tol = 1e-10, std::size_t max_iterations = 0);

  /// Solves A x = b to ||A x - b|| <= rel_tol * ||b||, starting from
  /// `guess` when it is non-empty. Throws SolverError on stagnation.
  std::vector<double> solve(std::span<const double> b, std::span<const double> guess = {},
                            SolveStats* stats = nullptr) const;

  [[nodiscard]] const SparseSymmetricMatrix& matrix() const { return *a_; }
  [[nodiscard]] double rel_tol() const { return rel_tol_; }

 private:
  const SparseSymmetricMatrix* a_;
  double rel_tol_;
  std::size_t max_iterations_;
  std::vector<double> inv_diag_;
};

std::vector<double> solve_spd(const SparseSymmetricMatrix& a, std::span<const double> b, double rel_tol = 1e-10);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace dcell
