#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "dcell/mesh.hpp"

namespace dcell {

namespace {

// Mean unique-edge length of the right-triangle split of a square of side s
// is s * (2 + sqrt 2) / 3.
constexpr double kEdgeFactor = (2.0 + std::numbers::sqrt2) / 3.0;
constexpr double kRingGrowth = 1.35;
constexpr double kStaircaseGap = 0.75;  // in units of the background spacing
constexpr int kSmoothingSweeps = 8;
// A 16-gon loses 0.64% of the circumference, which shows up as a flux bias of
// the exclusion model against the point model; 32 sides bring it to 0.16%.
constexpr int kMinCircleSegments = 32;

int grid_divisions(double side, double h_target) {
  return std::max(1, static_cast<int>(std::lround(side * kEdgeFactor / h_target)));
}

void require_square_params(double side, double h_target) {
  if (!(side > 0.0) || !std::isfinite(side)) throw ParameterError("side length must be positive and finite");
  if (!(h_target > 0.0) || !(h_target <= 0.5 * side)) {
    throw ParameterError("h_target must lie in (0, L/2]");
  }
}

double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

double min_angle(Point2 a, Point2 b, Point2 c) {
  const double la = distance(b, c);
  const double lb = distance(a, c);
  const double lc = distance(a, b);
  auto ang = [](double opp, double s1, double s2) {
    return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
  };
  return std::min({ang(la, lb, lc), ang(lb, la, lc), ang(lc, la, lb)});
}

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// Strip triangulation between two closed loops that are star-shaped with
/// respect to `center`, both ordered counterclockwise.
void zip_loops(const std::vector<int>& inner, const std::vector<int>& outer, const std::vector<Point2>& pts,
               Point2 center, std::vector<std::array<int, 3>>& cells) {
  const auto na = inner.size();
  const auto nb = outer.size();
  auto angle_of = [&](int v) {
    const Point2 d = pts[static_cast<std::size_t>(v)] - center;
    return std::atan2(d.y, d.x);
  };
  const double a0 = angle_of(inner[0]);
  std::size_t jstart = 0;
  double best = 10.0;
  for (std::size_t j = 0; j < nb; ++j) {
    const double d = std::abs(wrap_angle(angle_of(outer[j]) - a0));
    if (d < best) {
      best = d;
      jstart = j;
    }
  }
  auto A = [&](std::size_t k) { return inner[k % na]; };
  auto B = [&](std::size_t k) { return outer[(jstart + k) % nb]; };
  auto P = [&](int v) { return pts[static_cast<std::size_t>(v)]; };

  std::size_t ia = 0;
  std::size_t jb = 0;
  while (ia < na || jb < nb) {
    const int ca = A(ia);
    const int cb = B(jb);
    const bool okA = ia < na && signed_area(P(ca), P(cb), P(A(ia + 1))) > 0.0;
    const bool okB = jb < nb && signed_area(P(cb), P(B(jb + 1)), P(ca)) > 0.0;
    bool take_a;
    if (okA && okB) {
      take_a = distance(P(A(ia + 1)), P(cb)) <= distance(P(ca), P(B(jb + 1)));
    } else if (okA || okB) {
      take_a = okA;
    } else {
      throw MeshError("loop zipper produced an inverted triangle; cell too coarse for this resolution");
    }
    if (take_a) {
      cells.push_back({ca, cb, A(ia + 1)});
      ++ia;
    } else {
      cells.push_back({cb, B(jb + 1), ca});
      ++jb;
    }
  }
}

/// Laplacian smoothing restricted to `movable`; a move is kept only if it
/// increases the smallest angle among the incident cells.
void smooth(std::vector<Point2>& pts, const std::vector<std::array<int, 3>>& cells, const std::vector<int>& movable) {
  std::vector<std::vector<int>> incident(pts.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int v : cells[c]) incident[static_cast<std::size_t>(v)].push_back(static_cast<int>(c));
  }
  auto local_quality = [&](int v) {
    double q = std::numbers::pi;
    for (int c : incident[static_cast<std::size_t>(v)]) {
      const auto& t = cells[static_cast<std::size_t>(c)];
      const Point2 a = pts[static_cast<std::size_t>(t[0])];
      const Point2 b = pts[static_cast<std::size_t>(t[1])];
      const Point2 d = pts[static_cast<std::size_t>(t[2])];
      if (!(signed_area(a, b, d) > 0.0)) return -1.0;
      q = std::min(q, min_angle(a, b, d));
    }
    return q;
  };
  for (int sweep = 0; sweep < kSmoothingSweeps; ++sweep) {
    for (int v : movable) {
      std::set<int> nbrs;
      for (int c : incident[static_cast<std::size_t>(v)]) {
        for (int w : cells[static_cast<std::size_t>(c)]) {
          if (w != v) nbrs.insert(w);
        }
      }
      Point2 avg{};
      for (int w : nbrs) avg = avg + pts[static_cast<std::size_t>(w)];
      avg = (1.0 / static_cast<double>(nbrs.size())) * avg;
      const Point2 old = pts[static_cast<std::size_t>(v)];
      const double before = local_quality(v);
      pts[static_cast<std::size_t>(v)] = avg;
      if (local_quality(v) <= before) pts[static_cast<std::size_t>(v)] = old;
    }
  }
}

void throw_if_invalid(const Mesh& mesh) {
  const auto issues = check_invariants(mesh);
  if (!issues.empty()) throw MeshError("mesh generation produced an invalid mesh: " + issues.front());
}

}  // namespace

Mesh build_square_mesh(double side, double h_target) {
  require_square_params(side, h_target);
  const int n = grid_divisions(side, h_target);
  const auto stride = n + 1;
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(stride * stride));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) pts.push_back({side * i / n, side * j / n});
  }
  auto id = [stride](int i, int j) { return j * stride + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < n; ++i) {
    boundary.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::Outer});
    boundary.push_back({{id(n, i), id(n, i + 1)}, BoundaryTag::Outer});
    boundary.push_back({{id(i + 1, n), id(i, n)}, BoundaryTag::Outer});
    boundary.push_back({{id(0, i + 1), id(0, i)}, BoundaryTag::Outer});
  }
  Mesh mesh(side, std::move(pts), std::move(cells), std::move(boundary));
  throw_if_invalid(mesh);
  return mesh;
}

Mesh build_punctured_square_mesh(double side, double h_target, const CellSpec& cell) {
  require_square_params(side, h_target);
  const double R = cell.radius;
  const Point2 c = cell.center;
  if (!(R > 0.0)) throw ParameterError("cell radius must be positive");
  const double clearance = std::min({c.x - R, side - c.x - R, c.y - R, side - c.y - R});
  if (!(clearance >= 2.0 * h_target)) {
    throw ParameterError("cell disk must keep a clearance of at least 2*h_target from the domain boundary");
  }

  const int n = grid_divisions(side, h_target);
  const double s = side / n;

  // Graded rings of nodes from the circle out to the background spacing.
  struct Ring {
    double radius;
    int count;
  };
  const int n_circle =
      std::max(kMinCircleSegments, static_cast<int>(std::lround(2.0 * std::numbers::pi * R / h_target)));
  std::vector<Ring> rings{{R, n_circle}};
  double spacing = 2.0 * std::numbers::pi * R / n_circle;
  while (spacing < 0.999 * s) {
    const double next = std::min(s, spacing * kRingGrowth);
    const double r = rings.back().radius + 0.5 * std::numbers::sqrt3 * 0.5 * (spacing + next);
    const int count = std::max(rings.back().count, static_cast<int>(std::lround(2.0 * std::numbers::pi * r / next)));
    rings.push_back({r, count});
    spacing = next;
  }
  const double r_last = rings.back().radius;

  // Background squares whose centre lies within rho are removed; every kept
  // square then stays at least kStaircaseGap * s outside the last ring.
  const double rho = r_last + kStaircaseGap * s + s / std::numbers::sqrt2;
  std::vector<char> removed(static_cast<std::size_t>(n * n), 0);
  auto sq = [n](int i, int j) { return static_cast<std::size_t>(j * n + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point2 mid{(i + 0.5) * s, (j + 0.5) * s};
      if (distance(mid, c) < rho) {
        if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
          throw ParameterError("cell is too close to the domain boundary for this mesh resolution");
        }
        removed[sq(i, j)] = 1;
      }
    }
  }

  const int stride = n + 1;
  std::vector<int> grid_to_mesh(static_cast<std::size_t>(stride * stride), -1);
  std::vector<Point2> pts;
  auto gid = [&](int i, int j) {
    auto& slot = grid_to_mesh[static_cast<std::size_t>(j * stride + i)];
    if (slot < 0) {
      slot = static_cast<int>(pts.size());
      pts.push_back({side * i / n, side * j / n});
    }
    return slot;
  };
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (removed[sq(i, j)]) continue;
      const int v00 = gid(i, j);
      const int v10 = gid(i + 1, j);
      const int v11 = gid(i + 1, j + 1);
      const int v01 = gid(i, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }

  // Staircase loop: corners shared between a removed and a kept square.
  std::set<int> stair_set;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!removed[sq(i, j)]) continue;
      const std::array<std::array<int, 2>, 4> corners{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
      for (const auto& [ci, cj] : corners) {
        const int g = grid_to_mesh[static_cast<std::size_t>(cj * stride + ci)];
        if (g >= 0) stair_set.insert(g);
      }
    }
  }
  std::vector<int> stair(stair_set.begin(), stair_set.end());
  auto angle_of = [&](int v) {
    const Point2 d = pts[static_cast<std::size_t>(v)] - c;
    return std::atan2(d.y, d.x);
  };
  std::sort(stair.begin(), stair.end(), [&](int a, int b) { return angle_of(a) < angle_of(b); });

  const auto first_ring_vertex = static_cast<int>(pts.size());
  std::vector<std::vector<int>> ring_ids;
  for (std::size_t k = 0; k < rings.size(); ++k) {
    const auto& ring = rings[k];
    const double offset = (k % 2 == 0) ? 0.0 : std::numbers::pi / ring.count;
    std::vector<int> ids;
    for (int i = 0; i < ring.count; ++i) {
      const double theta = offset + 2.0 * std::numbers::pi * i / ring.count;
      ids.push_back(static_cast<int>(pts.size()));
      pts.push_back({c.x + ring.radius * std::cos(theta), c.y + ring.radius * std::sin(theta)});
    }
    ring_ids.push_back(std::move(ids));
  }
  for (std::size_t k = 0; k + 1 < ring_ids.size(); ++k) zip_loops(ring_ids[k], ring_ids[k + 1], pts, c, cells);
  zip_loops(ring_ids.back(), stair, pts, c, cells);

  std::vector<int> movable(stair.begin(), stair.end());
  for (int v = first_ring_vertex + n_circle; v < static_cast<int>(pts.size()); ++v) movable.push_back(v);
  smooth(pts, cells, movable);

  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < n; ++i) {
    boundary.push_back({{gid(i, 0), gid(i + 1, 0)}, BoundaryTag::Outer});
    boundary.push_back({{gid(n, i), gid(n, i + 1)}, BoundaryTag::Outer});
    boundary.push_back({{gid(i + 1, n), gid(i, n)}, BoundaryTag::Outer});
    boundary.push_back({{gid(0, i + 1), gid(0, i)}, BoundaryTag::Outer});
  }
  const auto& circle = ring_ids.front();
  for (std::size_t i = 0; i < circle.size(); ++i) {
    boundary.push_back({{circle[(i + 1) % circle.size()], circle[i]}, BoundaryTag::Cell});
  }

  Mesh mesh(side, std::move(pts), std::move(cells), std::move(boundary), Mesh::Hole{c, R});
  throw_if_invalid(mesh);
  // Overlapping cells would show up as excess area.
  const double polygon = 0.5 * n_circle * R * R * std::sin(2.0 * std::numbers::pi / n_circle);
  if (std::abs(mesh.total_area() - (side * side - polygon)) > 1e-10 * side * side) {
    throw MeshError("mesh generation produced overlapping cells");
  }
  return mesh;
}

}  // namespace dcell
