#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcell {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
double distance(Point2 a, Point2 b);
double cross(Point2 a, Point2 b);

/// Thrown for invalid construction parameters (ranges, clearance).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a mesh violates one of its structural invariants.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a point that must lie in a mesh cannot be located.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundaryTag : std::uint8_t { Outer = 0, Cell = 1 };

const char* to_string(BoundaryTag tag);

struct BoundaryEdge {
  std::array<int, 2> vertices;
  BoundaryTag tag;
};

/// A biological cell: disk of radius `radius` around `center` that exchanges
/// compound through its boundary with flux density `phi - uptake * u`.
struct CellSpec {
  Point2 center{5.0, 5.0};
  double radius = 0.25;
  double phi = 1.0;
  double uptake = 1.0;
};

struct PointLocation {
  int cell = -1;
  std::array<double, 3> bary{};
};

/// Conforming P1 triangulation with tagged boundary edges.
///
/// Vertices are stored in a flat list, cells as counterclockwise index
/// triples. Cell adjacency is derived at construction and used by the
/// walking point locator. The object is immutable after construction.
class Mesh {
 public:
  struct Hole {
    Point2 center;
    double radius;
  };

  Mesh(double side_length, std::vector<Point2> vertices, std::vector<std::array<int, 3>> cells,
       std::vector<BoundaryEdge> boundary_edges, std::optional<Hole> hole = std::nullopt);

  [[nodiscard]] double side_length() const { return side_; }
  [[nodiscard]] const std::optional<Hole>& hole() const { return hole_; }

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] std::span<const Point2> vertices() const { return vertices_; }
  [[nodiscard]] std::span<const std::array<int, 3>> cells() const { return cells_; }
  [[nodiscard]] std::span<const BoundaryEdge> boundary_edges() const { return boundary_; }
  [[nodiscard]] const Point2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::array<int, 3>& cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }

  /// Neighbour across the edge opposite local vertex k, or -1 on the boundary.
  [[nodiscard]] const std::array<int, 3>& neighbors(int c) const {
    return neighbors_[static_cast<std::size_t>(c)];
  }

  [[nodiscard]] double signed_area(int c) const;
  [[nodiscard]] double total_area() const;
  [[nodiscard]] Point2 centroid(int c) const;
  [[nodiscard]] std::size_t num_edges() const { return num_edges_; }
  [[nodiscard]] std::size_t count_edges(BoundaryTag tag) const;
  /// Total length of the boundary polyline carrying `tag`.
  [[nodiscard]] double boundary_length(BoundaryTag tag) const;

  /// Barycentric coordinates of p with respect to cell c (unclamped).
  [[nodiscard]] std::array<double, 3> barycentric(int c, Point2 p) const;

  /// Walk through neighbours starting at `hint`, falling back to a
  /// brute-force scan. Returns nullopt when p lies outside the mesh.
  [[nodiscard]] std::optional<PointLocation> locate(Point2 p, int hint = -1) const;

 private:
  std::optional<PointLocation> accept(int c, Point2 p) const;

  double side_;
  std::vector<Point2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryEdge> boundary_;
  std::optional<Hole> hole_;
  std::vector<std::array<int, 3>> neighbors_;
  std::size_t num_edges_ = 0;
};

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_aspect = 0.0;
  double avg_edge_length = 0.0;
  std::size_t num_vertices = 0;
  std::size_t num_cells = 0;
};

/// Structured triangulation of [0,L]^2; every boundary edge is tagged Outer.
Mesh build_square_mesh(double side_length, double h_target);

/// Triangulation of [0,L]^2 minus the cell disk. The disk boundary is
/// approximated by an inscribed polygon with max(32, round(2 pi R / h))
/// segments whose edges carry the Cell tag.
Mesh build_punctured_square_mesh(double side_length, double h_target, const CellSpec& cell);

/// Throws MeshError if any cell is degenerate or inverted.
QualityReport mesh_quality(const Mesh& mesh);

/// Lists every violated structural invariant (empty when the mesh is valid).
std::vector<std::string> check_invariants(const Mesh& mesh);

inline std::optional<PointLocation> locate_point(const Mesh& mesh, Point2 p) { return mesh.locate(p); }

/// VTK legacy ASCII unstructured grid; `scalars` (one per vertex) is written
/// as point data named `name` when non-empty.
void write_vtk(const Mesh& mesh, const std::filesystem::path& path, std::span<const double> scalars = {},
               const std::string& name = "concentration");

/// Companion file holding the boundary edges as VTK lines with an integer
/// `boundary_tag` cell array (0 = outer, 1 = cell).
void write_boundary_vtk(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace dcell
