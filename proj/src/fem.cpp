#include "dcell/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dcell {

namespace {

constexpr int kMaxGaussianDepth = 14;
constexpr double kGaussianCutoff = 12.0;  // in standard deviations

void require_dimension(std::span<const double> u, const SparseSymmetricMatrix& m) {
  if (u.size() != m.size()) throw std::invalid_argument("field length does not match operator dimension");
}

double checked_area(const Mesh& mesh, int c) {
  const double area = mesh.signed_area(c);
  if (!(area > 0.0)) throw AssemblyError("degenerate or inverted cell " + std::to_string(c));
  return area;
}

std::vector<BoundaryEdge> tagged_edges(const Mesh& mesh, BoundaryTag tag) {
  std::vector<BoundaryEdge> out;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag == tag) out.push_back(e);
  }
  if (out.empty()) throw ParameterError(std::string("no boundary edges carry tag '") + to_string(tag) + "'");
  return out;
}

struct GaussianIntegrator {
  const Mesh& mesh;
  int cell;
  Point2 center;
  double sigma;
  std::array<double, 3> acc{};

  void run(const SubTriangle& sub, double area, int depth) {
    const Point2 a = to_physical(mesh, cell, sub[0]);
    const Point2 b = to_physical(mesh, cell, sub[1]);
    const Point2 c = to_physical(mesh, cell, sub[2]);
    if (distance_to_triangle(center, a, b, c) > kGaussianCutoff * sigma) return;
    const double diam = std::max({distance(a, b), distance(b, c), distance(c, a)});
    if (sigma < 2.0 * diam && depth < kMaxGaussianDepth) {
      for (const auto& s : split4(sub)) run(s, 0.25 * area, depth + 1);
      return;
    }
    const auto& rule = degree5_rule();
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& r = rule.points[q];
      Bary bary{};
      for (std::size_t k = 0; k < 3; ++k) bary[k] = r[0] * sub[0][k] + r[1] * sub[1][k] + r[2] * sub[2][k];
      const Point2 x = to_physical(mesh, cell, bary);
      const Point2 d = x - center;
      const double g = norm * std::exp(-(d.x * d.x + d.y * d.y) / (2.0 * sigma * sigma));
      for (std::size_t k = 0; k < 3; ++k) acc[k] += rule.weights[q] * area * g * bary[k];
    }
  }
};

}  // namespace

bool NodalField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

NodalField NodalField::interpolate(const Mesh& mesh, const std::function<double(Point2)>& f) {
  std::vector<double> v;
  v.reserve(mesh.num_vertices());
  for (const auto& p : mesh.vertices()) v.push_back(f(p));
  return NodalField(std::move(v));
}

SparseSymmetricMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_cells());
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    const double area = checked_area(mesh, c);
    const auto& v = mesh.cell(c);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) t.push_back({v[i], v[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
    }
  }
  return SparseSymmetricMatrix::from_triplets(mesh.num_vertices(), std::move(t));
}

SparseSymmetricMatrix assemble_stiffness(const Mesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_cells());
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    const double area = checked_area(mesh, c);
    const auto& v = mesh.cell(c);
    // grad psi_i = perp(edge opposite i) / (2 * area)
    std::array<Point2, 3> e{};
    for (std::size_t i = 0; i < 3; ++i) {
      e[i] = mesh.vertex(v[(i + 2) % 3]) - mesh.vertex(v[(i + 1) % 3]);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        t.push_back({v[i], v[j], (e[i].x * e[j].x + e[i].y * e[j].y) / (4.0 * area)});
      }
    }
  }
  return SparseSymmetricMatrix::from_triplets(mesh.num_vertices(), std::move(t));
}

SparseSymmetricMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag) {
  std::vector<Triplet> t;
  for (const auto& e : tagged_edges(mesh, tag)) {
    const double len = distance(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]));
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        t.push_back({e.vertices[i], e.vertices[j], len / 6.0 * (i == j ? 2.0 : 1.0)});
      }
    }
  }
  return SparseSymmetricMatrix::from_triplets(mesh.num_vertices(), std::move(t));
}

std::vector<double> assemble_boundary_load(const Mesh& mesh, BoundaryTag tag, double flux) {
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (const auto& e : tagged_edges(mesh, tag)) {
    const double len = distance(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]));
    for (int v : e.vertices) b[static_cast<std::size_t>(v)] += 0.5 * flux * len;
  }
  return b;
}

std::vector<double> assemble_boundary_load(const Mesh& mesh, BoundaryTag tag,
                                           const std::function<double(Point2)>& flux) {
  std::vector<double> b(mesh.num_vertices(), 0.0);
  const double g = 0.5 / std::numbers::sqrt3;
  for (const auto& e : tagged_edges(mesh, tag)) {
    const Point2 p0 = mesh.vertex(e.vertices[0]);
    const Point2 p1 = mesh.vertex(e.vertices[1]);
    const double len = distance(p0, p1);
    for (double s : {0.5 - g, 0.5 + g}) {
      const double f = flux(p0 + s * (p1 - p0));
      b[static_cast<std::size_t>(e.vertices[0])] += 0.5 * len * f * (1.0 - s);
      b[static_cast<std::size_t>(e.vertices[1])] += 0.5 * len * f * s;
    }
  }
  return b;
}

std::vector<double> integrate_gaussian_load(const Mesh& mesh, Point2 center, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("Gaussian width must be positive");
  if (!mesh.locate(center)) throw ParameterError("Gaussian centre lies outside the mesh");
  std::vector<double> b(mesh.num_vertices(), 0.0);
  const SubTriangle whole{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}};
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    GaussianIntegrator gi{mesh, c, center, sigma};
    gi.run(whole, checked_area(mesh, c), 0);
    const auto& v = mesh.cell(c);
    for (std::size_t k = 0; k < 3; ++k) b[static_cast<std::size_t>(v[k])] += gi.acc[k];
  }
  return b;
}

std::vector<double> assemble_gaussian_load(const Mesh& mesh, Point2 center, double sigma) {
  auto b = integrate_gaussian_load(mesh, center, sigma);
  double total = 0.0;
  for (double v : b) total += v;
  if (!(total > 0.0)) throw AssemblyError("Gaussian load integrates to zero on this mesh");
  for (double& v : b) v /= total;
  return b;
}

double l2_norm(std::span<const double> u, const SparseSymmetricMatrix& mass) {
  require_dimension(u, mass);
  return std::sqrt(std::max(0.0, mass.bilinear(u, u)));
}

double h1_seminorm(std::span<const double> u, const SparseSymmetricMatrix& stiffness) {
  require_dimension(u, stiffness);
  return std::sqrt(std::max(0.0, stiffness.bilinear(u, u)));
}

double total_mass(std::span<const double> u, const SparseSymmetricMatrix& mass) {
  require_dimension(u, mass);
  const auto mu = mass.apply(u);
  double s = 0.0;
  for (double v : mu) s += v;
  return s;
}

double interpolate_at(std::span<const double> u, const Mesh& mesh, int cell, const Bary& bary) {
  const auto& v = mesh.cell(cell);
  return bary[0] * u[static_cast<std::size_t>(v[0])] + bary[1] * u[static_cast<std::size_t>(v[1])] +
         bary[2] * u[static_cast<std::size_t>(v[2])];
}

std::optional<double> evaluate(std::span<const double> u, const Mesh& mesh, Point2 p) {
  if (u.size() != mesh.num_vertices()) throw std::invalid_argument("field length does not match the mesh");
  const auto loc = mesh.locate(p);
  if (!loc) return std::nullopt;
  return interpolate_at(u, mesh, loc->cell, loc->bary);
}

Point2 cell_gradient(std::span<const double> u, const Mesh& mesh, int cell) {
  const auto& v = mesh.cell(cell);
  const double two_area = 2.0 * mesh.signed_area(cell);
  Point2 g{};
  for (std::size_t i = 0; i < 3; ++i) {
    const Point2 e = mesh.vertex(v[(i + 2) % 3]) - mesh.vertex(v[(i + 1) % 3]);
    const double ui = u[static_cast<std::size_t>(v[i])];
    // inward normal of the opposite edge: rotate it by +90 degrees
    g.x -= ui * e.y / two_area;
    g.y += ui * e.x / two_area;
  }
  return g;
}

double l2_norm(std::span<const double> u, const Mesh& mesh, std::span<const QuadPoint> points) {
  double s = 0.0;
  for (const auto& q : points) {
    const double v = interpolate_at(u, mesh, q.cell, q.bary);
    s += q.weight * v * v;
  }
  return std::sqrt(s);
}

double h1_seminorm(std::span<const double> u, const Mesh& mesh, std::span<const QuadPoint> points) {
  double s = 0.0;
  int last = -1;
  Point2 g{};
  for (const auto& q : points) {
    if (q.cell != last) {
      g = cell_gradient(u, mesh, q.cell);
      last = q.cell;
    }
    s += q.weight * (g.x * g.x + g.y * g.y);
  }
  return std::sqrt(s);
}

}  // namespace dcell
