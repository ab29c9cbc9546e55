#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcell/mesh.hpp"
#include "dcell/quadrature.hpp"
#include "dcell/sparse.hpp"

namespace dcell {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P1 coefficient vector, one value per mesh vertex.
class NodalField {
 public:
  NodalField() = default;
  explicit NodalField(std::vector<double> values) : values_(std::move(values)) {}
  static NodalField constant(std::size_t n, double value) { return NodalField(std::vector<double>(n, value)); }
  static NodalField interpolate(const Mesh& mesh, const std::function<double(Point2)>& f);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] const std::vector<double>& vector() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  [[nodiscard]] bool all_finite() const;

 private:
  std::vector<double> values_;
};

SparseSymmetricMatrix assemble_mass(const Mesh& mesh);
SparseSymmetricMatrix assemble_stiffness(const Mesh& mesh);

/// Edge mass matrix on the boundary edges carrying `tag`.
SparseSymmetricMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag);

/// Load vector of a constant boundary flux density.
std::vector<double> assemble_boundary_load(const Mesh& mesh, BoundaryTag tag, double flux);

/// Load vector of a spatially varying flux datum (two-point Gauss per edge).
std::vector<double> assemble_boundary_load(const Mesh& mesh, BoundaryTag tag,
                                           const std::function<double(Point2)>& flux);

/// Gaussian regularisation of a Dirac measure at `center` with standard
/// deviation `sigma`: entries are integrals of g * psi_i, with cells split
/// 4-way while sigma < 2 * (sub-cell diameter), then rescaled to unit total.
std::vector<double> assemble_gaussian_load(const Mesh& mesh, Point2 center, double sigma);

/// Same as assemble_gaussian_load but without the final rescaling.
std::vector<double> integrate_gaussian_load(const Mesh& mesh, Point2 center, double sigma);

double l2_norm(std::span<const double> u, const SparseSymmetricMatrix& mass);
double h1_seminorm(std::span<const double> u, const SparseSymmetricMatrix& stiffness);
double total_mass(std::span<const double> u, const SparseSymmetricMatrix& mass);

/// Barycentric interpolation; nullopt when p lies outside the mesh.
std::optional<double> evaluate(std::span<const double> u, const Mesh& mesh, Point2 p);

double interpolate_at(std::span<const double> u, const Mesh& mesh, int cell, const Bary& bary);

/// Constant gradient of the P1 field on one cell.
Point2 cell_gradient(std::span<const double> u, const Mesh& mesh, int cell);

/// Quadrature evaluation of the L2 norm and H1 seminorm over a subset of the
/// mesh described by `points`.
double l2_norm(std::span<const double> u, const Mesh& mesh, std::span<const QuadPoint> points);
double h1_seminorm(std::span<const double> u, const Mesh& mesh, std::span<const QuadPoint> points);

}  // namespace dcell
