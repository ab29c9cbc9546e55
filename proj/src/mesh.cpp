#include "dcell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace dcell {

namespace {

constexpr double kBaryTol = 1e-12;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

struct EdgeUse {
  int first_cell = -1;
  int first_local = -1;
  int count = 0;
};

std::map<std::uint64_t, EdgeUse> edge_uses(std::span<const std::array<int, 3>> cells) {
  std::map<std::uint64_t, EdgeUse> uses;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const int a = cells[c][static_cast<std::size_t>((k + 1) % 3)];
      const int b = cells[c][static_cast<std::size_t>((k + 2) % 3)];
      auto& u = uses[edge_key(a, b)];
      if (u.count == 0) {
        u.first_cell = static_cast<int>(c);
        u.first_local = k;
      }
      ++u.count;
    }
  }
  return uses;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

const char* to_string(BoundaryTag tag) { return tag == BoundaryTag::Outer ? "outer" : "cell"; }

Mesh::Mesh(double side_length, std::vector<Point2> vertices, std::vector<std::array<int, 3>> cells,
           std::vector<BoundaryEdge> boundary_edges, std::optional<Hole> hole)
    : side_(side_length),
      vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      boundary_(std::move(boundary_edges)),
      hole_(hole) {
  const auto n = static_cast<int>(vertices_.size());
  for (const auto& c : cells_) {
    for (int v : c) {
      if (v < 0 || v >= n) throw MeshError("cell references vertex index out of range");
    }
  }
  neighbors_.assign(cells_.size(), {-1, -1, -1});
  std::map<std::uint64_t, std::pair<int, int>> open;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const int a = cells_[c][static_cast<std::size_t>((k + 1) % 3)];
      const int b = cells_[c][static_cast<std::size_t>((k + 2) % 3)];
      const auto key = edge_key(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::pair{static_cast<int>(c), k});
        ++num_edges_;
      } else if (it->second.first >= 0) {
        const auto [oc, ok] = it->second;
        neighbors_[c][static_cast<std::size_t>(k)] = oc;
        neighbors_[static_cast<std::size_t>(oc)][static_cast<std::size_t>(ok)] = static_cast<int>(c);
        it->second.first = -1;  // closed; a third use is a non-manifold edge
      }
    }
  }
}

double Mesh::signed_area(int c) const {
  const auto& t = cell(c);
  const Point2 a = vertex(t[0]);
  return 0.5 * cross(vertex(t[1]) - a, vertex(t[2]) - a);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) s += signed_area(static_cast<int>(c));
  return s;
}

Point2 Mesh::centroid(int c) const {
  const auto& t = cell(c);
  return (1.0 / 3.0) * (vertex(t[0]) + vertex(t[1]) + vertex(t[2]));
}

std::size_t Mesh::count_edges(BoundaryTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(boundary_.begin(), boundary_.end(), [tag](const BoundaryEdge& e) { return e.tag == tag; }));
}

double Mesh::boundary_length(BoundaryTag tag) const {
  double len = 0.0;
  for (const auto& e : boundary_) {
    if (e.tag == tag) len += distance(vertex(e.vertices[0]), vertex(e.vertices[1]));
  }
  return len;
}

std::array<double, 3> Mesh::barycentric(int c, Point2 p) const {
  const auto& t = cell(c);
  const Point2 a = vertex(t[0]);
  const Point2 b = vertex(t[1]);
  const Point2 d = vertex(t[2]);
  const double det = cross(b - a, d - a);
  const double l1 = cross(p - a, d - a) / det;
  const double l2 = cross(b - a, p - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

std::optional<PointLocation> Mesh::accept(int c, Point2 p) const {
  auto b = barycentric(c, p);
  if (*std::min_element(b.begin(), b.end()) < -kBaryTol) return std::nullopt;
  double sum = 0.0;
  for (double& v : b) {
    v = std::max(v, 0.0);
    sum += v;
  }
  for (double& v : b) v /= sum;
  return PointLocation{c, b};
}

std::optional<PointLocation> Mesh::locate(Point2 p, int hint) const {
  if (cells_.empty()) return std::nullopt;
  int c = (hint >= 0 && static_cast<std::size_t>(hint) < cells_.size()) ? hint : 0;
  const std::size_t max_steps = 4 * static_cast<std::size_t>(std::sqrt(static_cast<double>(cells_.size()))) + 64;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto b = barycentric(c, p);
    const auto k = static_cast<std::size_t>(std::min_element(b.begin(), b.end()) - b.begin());
    if (b[k] >= -kBaryTol) return accept(c, p);
    const int next = neighbors_[static_cast<std::size_t>(c)][k];
    if (next < 0) break;
    c = next;
  }
  // Brute force: the walk hit the boundary (non-convex domain) or cycled.
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto b = barycentric(static_cast<int>(i), p);
    const double m = *std::min_element(b.begin(), b.end());
    if (m > best_min) {
      best_min = m;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || best_min < -kBaryTol) return std::nullopt;
  return accept(best, p);
}

QualityReport mesh_quality(const Mesh& mesh) {
  QualityReport q;
  q.num_vertices = mesh.num_vertices();
  q.num_cells = mesh.num_cells();
  q.min_angle_deg = 180.0;
  std::map<std::uint64_t, double> edges;
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    const double area = mesh.signed_area(c);
    if (!(area > 0.0)) {
      throw MeshError("cell " + std::to_string(c) + " is degenerate or inverted (signed area " +
                      fmt_double(area) + ")");
    }
    const auto& t = mesh.cell(c);
    std::array<double, 3> len{};
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>((k + 1) % 3)];
      const int b = t[static_cast<std::size_t>((k + 2) % 3)];
      len[static_cast<std::size_t>(k)] = distance(mesh.vertex(a), mesh.vertex(b));
      edges[edge_key(a, b)] = len[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < 3; ++k) {
      const double opp = len[static_cast<std::size_t>(k)];
      const double s1 = len[static_cast<std::size_t>((k + 1) % 3)];
      const double s2 = len[static_cast<std::size_t>((k + 2) % 3)];
      const double cosang = std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0);
      q.min_angle_deg = std::min(q.min_angle_deg, std::acos(cosang) * 180.0 / std::numbers::pi);
    }
    // circumradius / (2 * inradius); 1 for an equilateral triangle
    const double perim = len[0] + len[1] + len[2];
    const double r_in = 2.0 * area / perim;
    const double r_circ = len[0] * len[1] * len[2] / (4.0 * area);
    q.max_aspect = std::max(q.max_aspect, r_circ / (2.0 * r_in));
  }
  double sum = 0.0;
  for (const auto& [key, l] : edges) sum += l;
  q.avg_edge_length = edges.empty() ? 0.0 : sum / static_cast<double>(edges.size());
  return q;
}

std::vector<std::string> check_invariants(const Mesh& mesh) {
  std::vector<std::string> issues;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (!(mesh.signed_area(static_cast<int>(c)) > 0.0)) {
      issues.push_back("cell " + std::to_string(c) + " has non-positive signed area");
    }
  }
  const auto uses = edge_uses(mesh.cells());
  std::map<std::uint64_t, int> tagged;
  for (const auto& e : mesh.boundary_edges()) ++tagged[edge_key(e.vertices[0], e.vertices[1])];
  for (const auto& [key, u] : uses) {
    if (u.count > 2) issues.push_back("non-manifold edge shared by " + std::to_string(u.count) + " cells");
    if (u.count == 1 && !tagged.contains(key)) issues.push_back("untagged boundary edge (hanging node or gap)");
  }
  for (const auto& [key, n] : tagged) {
    auto it = uses.find(key);
    if (n != 1) issues.push_back("boundary edge listed more than once");
    if (it == uses.end() || it->second.count != 1) {
      issues.push_back("tagged boundary edge does not belong to exactly one cell");
    }
  }
  const double L = mesh.side_length();
  for (const auto& e : mesh.boundary_edges()) {
    for (int v : e.vertices) {
      const Point2 p = mesh.vertex(v);
      if (e.tag == BoundaryTag::Outer) {
        const double d = std::min({std::abs(p.x), std::abs(p.y), std::abs(L - p.x), std::abs(L - p.y)});
        if (d > 1e-12 * L) issues.push_back("outer vertex " + std::to_string(v) + " off the square boundary");
      } else {
        if (!mesh.hole()) {
          issues.push_back("cell-tagged edge on a mesh without a hole");
          continue;
        }
        const double R = mesh.hole()->radius;
        if (std::abs(distance(p, mesh.hole()->center) - R) > 1e-12 * R) {
          issues.push_back("cell vertex " + std::to_string(v) + " off the circle");
        }
      }
    }
  }
  // Euler characteristic V - E + F = 1 - holes for a connected planar mesh.
  const long euler = static_cast<long>(mesh.num_vertices()) - static_cast<long>(uses.size()) +
                     static_cast<long>(mesh.num_cells());
  const long expected = mesh.hole() ? 0 : 1;
  if (euler != expected) {
    issues.push_back("Euler characteristic " + std::to_string(euler) + ", expected " + std::to_string(expected));
  }
  return issues;
}

void write_vtk(const Mesh& mesh, const std::filesystem::path& path, std::span<const double> scalars,
               const std::string& name) {
  if (!scalars.empty() && scalars.size() != mesh.num_vertices()) {
    throw ParameterError("write_vtk: scalar field length does not match vertex count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# vtk DataFile Version 3.0\ndirac-cell mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << fmt_double(p.x) << ' ' << fmt_double(p.y) << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) out << "5\n";
  if (!scalars.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : scalars) out << fmt_double(v) << '\n';
  }
}

void write_boundary_vtk(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto edges = mesh.boundary_edges();
  out << "# vtk DataFile Version 3.0\ndirac-cell boundary edges\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << fmt_double(p.x) << ' ' << fmt_double(p.y) << " 0\n";
  out << "CELLS " << edges.size() << ' ' << 3 * edges.size() << '\n';
  for (const auto& e : edges) out << "2 " << e.vertices[0] << ' ' << e.vertices[1] << '\n';
  out << "CELL_TYPES " << edges.size() << '\n';
  for (std::size_t i = 0; i < edges.size(); ++i) out << "3\n";
  out << "CELL_DATA " << edges.size() << "\nSCALARS boundary_tag int 1\nLOOKUP_TABLE default\n";
  for (const auto& e : edges) out << static_cast<int>(e.tag) << '\n';
}

}  // namespace dcell
