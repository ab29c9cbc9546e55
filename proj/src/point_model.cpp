#include "dcell/point_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dcell {

const char* to_string(Coupling c) { return c == Coupling::Implicit ? "implicit" : "lag"; }

void PointConfig::validate() const {
  if (!(diffusion > 0.0)) throw ParameterError("diffusion coefficient must be positive");
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  if (!(t_end >= dt * (1.0 - 1e-12))) throw ParameterError("t_end must be at least one time step");
  if (!(cell.radius > 0.0)) throw ParameterError("cell radius must be positive");
  if (!(cell.uptake >= 0.0)) throw ParameterError("uptake rate must be non-negative");
  if (!std::isfinite(cell.phi)) throw ParameterError("flux density must be finite");
  if (!(sigma > 0.0)) throw ParameterError("regularisation width must be positive");
  if (quad_points < 16) throw ParameterError("need at least 16 quadrature points on the virtual boundary");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ParameterError("solver tolerance must lie in (0, 1)");
}

VirtualBoundary VirtualBoundary::build(const Mesh& mesh, Point2 center, double radius, int quad_points) {
  if (quad_points < 1) throw ParameterError("quadrature point count must be positive");
  VirtualBoundary vb;
  vb.center = center;
  vb.radius = radius;
  vb.trace_weights.assign(mesh.num_vertices(), 0.0);
  const double w = 2.0 * std::numbers::pi * radius / quad_points;
  std::optional<PointLocation> hint;
  for (int q = 0; q < quad_points; ++q) {
    const double theta = 2.0 * std::numbers::pi * q / quad_points;
    const Point2 p{center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
    const auto loc = mesh.locate(p, hint ? hint->cell : -1);
    if (!loc) throw GeometryError("virtual boundary point " + std::to_string(q) + " lies outside the mesh");
    hint = loc;
    vb.points.push_back(p);
    vb.weights.push_back(w);
    vb.located.push_back(*loc);
    const auto& v = mesh.cell(loc->cell);
    for (std::size_t k = 0; k < 3; ++k) vb.trace_weights[static_cast<std::size_t>(v[k])] += w * loc->bary[k];
  }
  return vb;
}

double trace_integral(std::span<const double> u, const VirtualBoundary& vb) {
  if (u.size() != vb.trace_weights.size()) throw std::invalid_argument("field does not match the virtual boundary mesh");
  return dot(vb.trace_weights, u);
}

double psi(std::span<const double> u, const CellSpec& cell, const VirtualBoundary& vb) {
  const double source = cell.phi * 2.0 * std::numbers::pi * vb.radius;
  if (cell.uptake == 0.0) return source;
  return source - cell.uptake * trace_integral(u, vb);
}

PointOperators::PointOperators(const Mesh& mesh, const PointConfig& config)
    : mesh_(&mesh), mass_(assemble_mass(mesh)), stiffness_(assemble_stiffness(mesh)) {
  config.validate();
  source_ = assemble_gaussian_load(mesh, config.cell.center, config.sigma);
  system_ = std::make_unique<SparseSymmetricMatrix>(linear_combination(1.0, mass_, config.dt * config.diffusion,
                                                                      stiffness_));
  solver_ = std::make_unique<PcgSolver>(*system_, config.rel_tol);
  boundary_ = VirtualBoundary::build(mesh, config.cell.center, config.cell.radius, config.quad_points);
  response_ = solver_->solve(source_);
  outside_ = quadrature_outside_disk(mesh, config.cell.center, config.cell.radius);
}

PointStep point_step(const NodalField& u_n, const PointOperators& ops, const PointConfig& config) {
  const auto& g = ops.source();
  auto rhs = ops.mass().apply(u_n.values());
  const double a = config.cell.uptake;
  const auto& vb = ops.boundary();

  if (config.coupling == Coupling::ExplicitLag || a == 0.0) {
    const double amplitude = psi(u_n.values(), config.cell, vb);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += config.dt * amplitude * g[i];
    NodalField next(ops.solver().solve(rhs, u_n.values()));
    // with a = 0 both couplings apply the same constant amplitude
    return {std::move(next), amplitude};
  }

  const double source = config.cell.phi * 2.0 * std::numbers::pi * vb.radius;
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += config.dt * source * g[i];
  auto y = ops.solver().solve(rhs, u_n.values());
  const auto& z = ops.response();
  const double denom = 1.0 + config.dt * a * dot(vb.trace_weights, z);
  if (std::abs(denom) < 1e-12) throw SolverError("rank-one update is singular", 0, denom);
  const double coef = config.dt * a * dot(vb.trace_weights, y) / denom;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= coef * z[i];
  NodalField next(std::move(y));
  const double applied = psi(next.values(), config.cell, vb);
  return {std::move(next), applied};
}

PointSimulation::PointSimulation(const Mesh& mesh, PointConfig config, std::optional<NodalField> u0)
    : config_(std::move(config)),
      ops_(mesh, config_),
      u_(u0 ? std::move(*u0) : NodalField::constant(mesh.num_vertices(), 0.0)),
      total_steps_(step_count(config_.t_end, config_.dt)) {
  if (u_.size() != mesh.num_vertices()) throw ParameterError("initial field does not match the mesh");
  applied_psi_ = current_psi();
}

double PointSimulation::time() const { return static_cast<double>(step_) * config_.dt; }

double PointSimulation::current_psi() const { return psi(u_.values(), config_.cell, ops_.boundary()); }

void PointSimulation::advance() {
  PointStep next;
  try {
    next = point_step(u_, ops_, config_);
  } catch (const SolverError& e) {
    throw SolverError(std::string("point step ") + std::to_string(step_ + 1) + ": " + e.what(), e.iterations(),
                      e.relative_residual());
  }
  std::vector<double> d(u_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = next.field[i] - u_[i];
  steady_ = steady_criterion(l2_norm(d, ops_.mass()), config_.dt, l2_norm(u_.values(), ops_.mass()));
  u_ = std::move(next.field);
  applied_psi_ = next.applied_psi;
  ++step_;
}

TimeRecord PointSimulation::record() const {
  TimeRecord r;
  r.t = time();
  r.l2_full = l2_norm(u_.values(), ops_.mass());
  r.l2_tilde = l2_norm(u_.values(), ops_.mesh(), ops_.outside_points());
  r.h1_semi = h1_seminorm(u_.values(), ops_.mesh(), ops_.outside_points());
  r.mass = total_mass(u_.values(), ops_.mass());
  r.exchange = current_psi();
  r.applied_exchange = applied_psi_;
  r.steady = steady_;
  return r;
}

RunResult run_point(const Mesh& mesh, const PointConfig& config, std::optional<NodalField> u0) {
  PointSimulation sim(mesh, config, std::move(u0));
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
