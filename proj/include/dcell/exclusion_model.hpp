#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "dcell/fem.hpp"
#include "dcell/records.hpp"

namespace dcell {

/// Diffusion on the punctured square with the Robin exchange condition
/// D grad(u).n = phi - a u on the cell boundary and no flux on the walls.
struct ExclusionConfig {
  double diffusion = 1.0;
  CellSpec cell;
  double dt = 0.04;
  double t_end = 40.0;
  double rel_tol = 1e-10;
  bool stop_at_steady = true;
  std::vector<double> snapshot_times;

  void validate() const;
};

/// Time-invariant operators of the backward Euler scheme
///   (M + dt (D K + a M_G)) u_{n+1} = M u_n + dt b_phi.
class ExclusionOperators {
 public:
  ExclusionOperators(const Mesh& mesh, const ExclusionConfig& config);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const SparseSymmetricMatrix& mass() const { return mass_; }
  [[nodiscard]] const SparseSymmetricMatrix& stiffness() const { return stiffness_; }
  [[nodiscard]] const SparseSymmetricMatrix& boundary_mass() const { return boundary_mass_; }
  [[nodiscard]] const std::vector<double>& flux_load() const { return flux_load_; }
  [[nodiscard]] const SparseSymmetricMatrix& system() const { return *system_; }
  [[nodiscard]] const PcgSolver& solver() const { return *solver_; }

  /// Discrete boundary exchange  1^T b_phi - a 1^T M_G u.
  [[nodiscard]] double boundary_flux(std::span<const double> u) const;

 private:
  const Mesh* mesh_;
  double uptake_;
  SparseSymmetricMatrix mass_;
  SparseSymmetricMatrix stiffness_;
  SparseSymmetricMatrix boundary_mass_;
  std::vector<double> flux_load_;
  std::vector<double> boundary_weights_;  // 1^T M_G
  std::unique_ptr<SparseSymmetricMatrix> system_;
  std::unique_ptr<PcgSolver> solver_;
};

NodalField exclusion_step(const NodalField& u_n, const ExclusionOperators& ops, const ExclusionConfig& config);

/// Stepwise driver; owns its state exclusively.
class ExclusionSimulation {
 public:
  ExclusionSimulation(const Mesh& mesh, ExclusionConfig config, std::optional<NodalField> u0 = std::nullopt);

  void advance();
  [[nodiscard]] TimeRecord record() const;
  [[nodiscard]] double time() const;
  [[nodiscard]] std::size_t steps_taken() const { return step_; }
  [[nodiscard]] std::size_t total_steps() const { return total_steps_; }
  [[nodiscard]] bool steady() const { return steady_; }
  [[nodiscard]] const NodalField& field() const { return u_; }
  [[nodiscard]] const ExclusionOperators& operators() const { return ops_; }
  [[nodiscard]] const ExclusionConfig& config() const { return config_; }

 private:
  ExclusionConfig config_;
  ExclusionOperators ops_;
  NodalField u_;
  std::size_t step_ = 0;
  std::size_t total_steps_;
  bool steady_ = false;
};

/// Runs to t_end (or to the steady state when config.stop_at_steady).
/// Solver failures are rethrown with the failing step index.
RunResult run_exclusion(const Mesh& mesh, const ExclusionConfig& config,
                        std::optional<NodalField> u0 = std::nullopt);

}  // namespace dcell
