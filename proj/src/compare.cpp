#include "dcell/compare.hpp"

#include <cmath>
#include <string>

namespace dcell {

TildeRestriction::TildeRestriction(const Mesh& full, const Mesh& tilde, Point2 center, double radius)
    : full_(&full), tilde_(&tilde) {
  const auto points = cell_quadrature(tilde);
  total_ = points.size();
  nodes_.reserve(points.size());
  int hint = -1;
  for (const auto& q : points) {
    if (distance(q.x, center) < radius) continue;
    const auto loc = full.locate(q.x, hint);
    if (!loc) {
      throw GeometryError("quadrature node (" + std::to_string(q.x.x) + ", " + std::to_string(q.x.y) +
                          ") of the punctured mesh lies outside the full mesh");
    }
    hint = loc->cell;
    nodes_.push_back({q.cell, q.bary, loc->cell, loc->bary, q.weight});
  }
}

std::vector<double> TildeRestriction::restrict_values(std::span<const double> u_p) const {
  if (u_p.size() != full_->num_vertices()) throw std::invalid_argument("field does not match the full mesh");
  std::vector<double> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(interpolate_at(u_p, *full_, n.full_cell, n.full_bary));
  return out;
}

TildeRestriction::Norms TildeRestriction::norms(std::span<const double> u_p, std::span<const double> u_s) const {
  if (u_p.size() != full_->num_vertices()) throw std::invalid_argument("u_P does not match the full mesh");
  if (u_s.size() != tilde_->num_vertices()) throw std::invalid_argument("u_S does not match the punctured mesh");
  double s = 0.0, p = 0.0, d = 0.0, g = 0.0;
  int last_s = -1, last_p = -1;
  Point2 grad_s{}, grad_p{};
  for (const auto& n : nodes_) {
    const double vs = interpolate_at(u_s, *tilde_, n.tilde_cell, n.tilde_bary);
    const double vp = interpolate_at(u_p, *full_, n.full_cell, n.full_bary);
    if (n.tilde_cell != last_s) {
      grad_s = cell_gradient(u_s, *tilde_, n.tilde_cell);
      last_s = n.tilde_cell;
    }
    if (n.full_cell != last_p) {
      grad_p = cell_gradient(u_p, *full_, n.full_cell);
      last_p = n.full_cell;
    }
    const Point2 dg = grad_p - grad_s;
    s += n.weight * vs * vs;
    p += n.weight * vp * vp;
    d += n.weight * (vp - vs) * (vp - vs);
    g += n.weight * (dg.x * dg.x + dg.y * dg.y);
  }
  return {std::sqrt(s), std::sqrt(p), std::sqrt(d), std::sqrt(g)};
}

std::optional<double> relative_l2_difference(std::span<const double> u_p, std::span<const double> u_s,
                                             const TildeRestriction& restriction) {
  const auto n = restriction.norms(u_p, u_s);
  if (!(n.l2_s > 0.0)) return std::nullopt;
  return n.diff_l2 / n.l2_s;
}

void ComparisonConfig::validate() const {
  exclusion().validate();
  point().validate();
  if (!(side_length > 0.0) || !(h > 0.0)) throw ParameterError("domain size and mesh size must be positive");
  if (!(h <= 0.5 * side_length)) throw ParameterError("mesh size must not exceed half the domain size");
  if (!std::isfinite(initial_value)) throw ParameterError("initial value must be finite");
}

ExclusionConfig ComparisonConfig::exclusion() const {
  ExclusionConfig c;
  c.diffusion = diffusion;
  c.cell = cell;
  c.dt = dt;
  c.t_end = t_end;
  c.rel_tol = rel_tol;
  c.stop_at_steady = false;
  return c;
}

PointConfig ComparisonConfig::point() const {
  PointConfig c;
  c.diffusion = diffusion;
  c.cell = cell;
  c.dt = dt;
  c.t_end = t_end;
  c.sigma = sigma;
  c.quad_points = quad_points;
  c.coupling = coupling;
  c.rel_tol = rel_tol;
  c.stop_at_steady = false;
  return c;
}

double time_to_threshold(const std::vector<ComparisonRow>& rows, double threshold) {
  double first = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (std::isnan(r.e_l2)) continue;
    if (r.e_l2 < threshold) {
      if (std::isinf(first)) first = r.t;
    } else {
      first = std::numeric_limits<double>::infinity();
    }
  }
  return first;
}

ComparisonSeries run_comparison(const ComparisonConfig& config, double threshold) {
  config.validate();
  const Mesh tilde = build_punctured_square_mesh(config.side_length, config.h, config.cell);
  const Mesh full = build_square_mesh(config.side_length, config.h);
  const TildeRestriction restriction(full, tilde, config.cell.center, config.cell.radius);

  ExclusionSimulation s(tilde, config.exclusion(), NodalField::constant(tilde.num_vertices(), config.initial_value));
  PointSimulation p(full, config.point(), NodalField::constant(full.num_vertices(), config.initial_value));

  ComparisonSeries out;
  out.discarded_points = restriction.discarded_points();
  out.total_points = restriction.total_points();
  auto push_row = [&] {
    const auto n = restriction.norms(p.field().values(), s.field().values());
    ComparisonRow row;
    row.t = s.time();
    if (n.l2_s > 0.0) row.e_l2 = n.diff_l2 / n.l2_s;
    row.abs_l2 = n.diff_l2;
    row.abs_h1 = n.diff_h1;
    row.l2_s = n.l2_s;
    row.l2_p = n.l2_p;
    row.psi = p.current_psi();
    row.steady = s.steady() && p.steady();
    if (row.steady && std::isinf(out.summary.steady_time)) out.summary.steady_time = row.t;
    out.rows.push_back(row);
  };
  push_row();
  while (s.steps_taken() < s.total_steps()) {
    s.advance();
    p.advance();
    push_row();
  }
  out.summary.threshold = threshold;
  out.summary.time_to_threshold = time_to_threshold(out.rows, threshold);
  out.summary.final_e_l2 = out.rows.back().e_l2;
  out.summary.final_l2_s = out.rows.back().l2_s;
  out.summary.final_l2_p = out.rows.back().l2_p;
  return out;
}

std::vector<double> annular_seminorms(const Mesh& mesh, std::span<const double> u, Point2 center,
                                      std::span<const double> radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0)) throw ParameterError("annulus radius must be positive");
    const auto pts = quadrature_outside_disk(mesh, center, r);
    out.push_back(h1_seminorm(u, mesh, pts));
  }
  return out;
}

}  // namespace dcell
