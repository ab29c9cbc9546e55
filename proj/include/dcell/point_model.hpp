#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "dcell/fem.hpp"
#include "dcell/records.hpp"

namespace dcell {

enum class Coupling { Implicit, ExplicitLag };

const char* to_string(Coupling c);

/// Diffusion on the full square with the cell replaced by a regularised
/// point source of amplitude Psi[u] = phi |dB| - a * (trace integral of u).
struct PointConfig {
  double diffusion = 1.0;
  CellSpec cell;
  double dt = 0.04;
  double t_end = 40.0;
  double sigma = 0.02;  // standard deviation of the Gaussian load
  int quad_points = 64;
  Coupling coupling = Coupling::Implicit;
  double rel_tol = 1e-10;
  bool stop_at_steady = true;
  std::vector<double> snapshot_times;

  void validate() const;
};

/// The cell boundary, now only a quadrature curve inside the full mesh.
struct VirtualBoundary {
  Point2 center;
  double radius = 0.0;
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<PointLocation> located;
  /// Per-vertex coefficients w with  trace_integral(u) = w . u.
  std::vector<double> trace_weights;

  /// Equally spaced points (periodic trapezoid rule). Throws GeometryError
  /// when a point cannot be located in `mesh`.
  static VirtualBoundary build(const Mesh& mesh, Point2 center, double radius, int quad_points);
};

double trace_integral(std::span<const double> u, const VirtualBoundary& vb);
double psi(std::span<const double> u, const CellSpec& cell, const VirtualBoundary& vb);

class PointOperators {
 public:
  PointOperators(const Mesh& mesh, const PointConfig& config);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const SparseSymmetricMatrix& mass() const { return mass_; }
  [[nodiscard]] const SparseSymmetricMatrix& stiffness() const { return stiffness_; }
  [[nodiscard]] const std::vector<double>& source() const { return source_; }
  [[nodiscard]] const SparseSymmetricMatrix& system() const { return *system_; }
  [[nodiscard]] const PcgSolver& solver() const { return *solver_; }
  [[nodiscard]] const VirtualBoundary& boundary() const { return boundary_; }
  /// A^{-1} g with A = M + dt D K; time invariant, so solved once.
  [[nodiscard]] const std::vector<double>& response() const { return response_; }
  /// Quadrature of the full mesh restricted to the complement of the disk.
  [[nodiscard]] const std::vector<QuadPoint>& outside_points() const { return outside_; }

 private:
  const Mesh* mesh_;
  SparseSymmetricMatrix mass_;
  SparseSymmetricMatrix stiffness_;
  std::vector<double> source_;
  std::unique_ptr<SparseSymmetricMatrix> system_;
  std::unique_ptr<PcgSolver> solver_;
  VirtualBoundary boundary_;
  std::vector<double> response_;
  std::vector<QuadPoint> outside_;
};

struct PointStep {
  NodalField field;
  double applied_psi = 0.0;  // amplitude that entered the step
};

PointStep point_step(const NodalField& u_n, const PointOperators& ops, const PointConfig& config);

class PointSimulation {
 public:
  PointSimulation(const Mesh& mesh, PointConfig config, std::optional<NodalField> u0 = std::nullopt);

  void advance();
  [[nodiscard]] TimeRecord record() const;
  [[nodiscard]] double time() const;
  [[nodiscard]] std::size_t steps_taken() const { return step_; }
  [[nodiscard]] std::size_t total_steps() const { return total_steps_; }
  [[nodiscard]] bool steady() const { return steady_; }
  [[nodiscard]] const NodalField& field() const { return u_; }
  [[nodiscard]] const PointOperators& operators() const { return ops_; }
  [[nodiscard]] const PointConfig& config() const { return config_; }
  [[nodiscard]] double current_psi() const;

 private:
  PointConfig config_;
  PointOperators ops_;
  NodalField u_;
  std::size_t step_ = 0;
  std::size_t total_steps_;
  bool steady_ = false;
  double applied_psi_;
};

RunResult run_point(const Mesh& mesh, const PointConfig& config, std::optional<NodalField> u0 = std::nullopt);

}  // namespace dcell
