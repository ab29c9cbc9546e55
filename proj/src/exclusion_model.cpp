#include "dcell/exclusion_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcell {

namespace {

double difference_l2(std::span<const double> a, std::span<const double> b, const SparseSymmetricMatrix& mass) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return l2_norm(d, mass);
}

}  // namespace

void ExclusionConfig::validate() const {
  if (!(diffusion > 0.0)) throw ParameterError("diffusion coefficient must be positive");
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  if (!(t_end >= dt * (1.0 - 1e-12))) throw ParameterError("t_end must be at least one time step");
  if (!(cell.radius > 0.0)) throw ParameterError("cell radius must be positive");
  if (!(cell.uptake >= 0.0)) throw ParameterError("uptake rate must be non-negative");
  if (!std::isfinite(cell.phi)) throw ParameterError("flux density must be finite");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ParameterError("solver tolerance must lie in (0, 1)");
}

ExclusionOperators::ExclusionOperators(const Mesh& mesh, const ExclusionConfig& config)
    : mesh_(&mesh),
      uptake_(config.cell.uptake),
      mass_(assemble_mass(mesh)),
      stiffness_(assemble_stiffness(mesh)),
      boundary_mass_(assemble_boundary_mass(mesh, BoundaryTag::Cell)),
      flux_load_(assemble_boundary_load(mesh, BoundaryTag::Cell, config.cell.phi)) {
  config.validate();
  const std::vector<double> ones(mesh.num_vertices(), 1.0);
  boundary_weights_ = boundary_mass_.apply(ones);
  auto robin = linear_combination(config.diffusion, stiffness_, config.cell.uptake, boundary_mass_);
  system_ = std::make_unique<SparseSymmetricMatrix>(linear_combination(1.0, mass_, config.dt, robin));
  solver_ = std::make_unique<PcgSolver>(*system_, config.rel_tol);
}

double ExclusionOperators::boundary_flux(std::span<const double> u) const {
  double source = 0.0;
  for (double b : flux_load_) source += b;
  return source - uptake_ * dot(boundary_weights_, u);
}

NodalField exclusion_step(const NodalField& u_n, const ExclusionOperators& ops, const ExclusionConfig& config) {
  auto rhs = ops.mass().apply(u_n.values());
  const auto& b = ops.flux_load();
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += config.dt * b[i];
  return NodalField(ops.solver().solve(rhs, u_n.values()));
}

ExclusionSimulation::ExclusionSimulation(const Mesh& mesh, ExclusionConfig config, std::optional<NodalField> u0)
    : config_(std::move(config)),
      ops_(mesh, config_),
      u_(u0 ? std::move(*u0) : NodalField::constant(mesh.num_vertices(), 0.0)),
      total_steps_(step_count(config_.t_end, config_.dt)) {
  if (u_.size() != mesh.num_vertices()) throw ParameterError("initial field does not match the mesh");
}

double ExclusionSimulation::time() const { return static_cast<double>(step_) * config_.dt; }

void ExclusionSimulation::advance() {
  NodalField next;
  try {
    next = exclusion_step(u_, ops_, config_);
  } catch (const SolverError& e) {
    throw SolverError(std::string("exclusion step ") + std::to_string(step_ + 1) + ": " + e.what(), e.iterations(),
                      e.relative_residual());
  }
  const double increment = difference_l2(next.values(), u_.values(), ops_.mass());
  steady_ = steady_criterion(increment, config_.dt, l2_norm(u_.values(), ops_.mass()));
  u_ = std::move(next);
  ++step_;
}

TimeRecord ExclusionSimulation::record() const {
  TimeRecord r;
  r.t = time();
  r.l2_tilde = l2_norm(u_.values(), ops_.mass());
  r.h1_semi = h1_seminorm(u_.values(), ops_.stiffness());
  r.mass = total_mass(u_.values(), ops_.mass());
  r.exchange = ops_.boundary_flux(u_.values());
  r.applied_exchange = r.exchange;
  r.steady = steady_;
  return r;
}

RunResult run_exclusion(const Mesh& mesh, const ExclusionConfig& config, std::optional<NodalField> u0) {
  ExclusionSimulation sim(mesh, config, std::move(u0));
  RunResult out;
  auto pending = config.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&] {
    while (next_snap < pending.size() && sim.time() >= pending[next_snap] - 1e-9 * config.dt) {
      out.snapshots.push_back({sim.time(), sim.field()});
      ++next_snap;
    }
  };
  out.records.push_back(sim.record());
  take_snapshots();
  while (sim.steps_taken() < sim.total_steps()) {
    sim.advance();
    out.records.push_back(sim.record());
    take_snapshots();
    if (sim.steady()) {
      out.reached_steady = true;
      if (config.stop_at_steady) break;
    }
  }
  return out;
}

}  // namespace dcell
