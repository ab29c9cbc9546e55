#include "dcell/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace dcell {

namespace {

Bary mid(const Bary& a, const Bary& b) { return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])}; }

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

void append_sub_rule(const Mesh& mesh, int cell, const SubTriangle& sub, double sub_area, Point2 center,
                     double radius, int levels, std::vector<QuadPoint>& out) {
  const Point2 a = to_physical(mesh, cell, sub[0]);
  const Point2 b = to_physical(mesh, cell, sub[1]);
  const Point2 c = to_physical(mesh, cell, sub[2]);
  const double dmax = std::max({distance(a, center), distance(b, center), distance(c, center)});
  if (dmax <= radius) return;
  const double dmin = distance_to_triangle(center, a, b, c);
  if (levels > 0 && dmin < radius) {
    for (const auto& s : split4(sub)) append_sub_rule(mesh, cell, s, 0.25 * sub_area, center, radius, levels - 1, out);
    return;
  }
  const auto& rule = degree5_rule();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& r = rule.points[q];
    Bary bary{};
    for (std::size_t k = 0; k < 3; ++k) bary[k] = r[0] * sub[0][k] + r[1] * sub[1][k] + r[2] * sub[2][k];
    const Point2 x = to_physical(mesh, cell, bary);
    if (distance(x, center) < radius) continue;
    out.push_back({cell, bary, x, rule.weights[q] * sub_area});
  }
}

}  // namespace

const TriangleRule& degree5_rule() {
  static const TriangleRule rule = [] {
    const double r15 = std::sqrt(15.0);
    const double a1 = (6.0 - r15) / 21.0;
    const double b1 = (9.0 + 2.0 * r15) / 21.0;
    const double w1 = (155.0 - r15) / 1200.0;
    const double a2 = (6.0 + r15) / 21.0;
    const double b2 = (9.0 - 2.0 * r15) / 21.0;
    const double w2 = (155.0 + r15) / 1200.0;
    TriangleRule r;
    r.points = {Bary{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                Bary{b1, a1, a1}, Bary{a1, b1, a1}, Bary{a1, a1, b1},
                Bary{b2, a2, a2}, Bary{a2, b2, a2}, Bary{a2, a2, b2}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

std::array<SubTriangle, 4> split4(const SubTriangle& t) {
  const Bary m01 = mid(t[0], t[1]);
  const Bary m12 = mid(t[1], t[2]);
  const Bary m20 = mid(t[2], t[0]);
  return {SubTriangle{t[0], m01, m20}, SubTriangle{m01, t[1], m12}, SubTriangle{m20, m12, t[2]},
          SubTriangle{m12, m20, m01}};
}

Point2 to_physical(const Mesh& mesh, int cell, const Bary& b) {
  const auto& t = mesh.cell(cell);
  const Point2 p0 = mesh.vertex(t[0]);
  const Point2 p1 = mesh.vertex(t[1]);
  const Point2 p2 = mesh.vertex(t[2]);
  return {b[0] * p0.x + b[1] * p1.x + b[2] * p2.x, b[0] * p0.y + b[1] * p1.y + b[2] * p2.y};
}

double distance_to_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(c - b, p - b);
  const double d3 = cross(a - c, p - c);
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  if (!(has_neg && has_pos)) return 0.0;
  return std::min({segment_distance(p, a, b), segment_distance(p, b, c), segment_distance(p, c, a)});
}

std::vector<QuadPoint> cell_quadrature(const Mesh& mesh) {
  const auto& rule = degree5_rule();
  std::vector<QuadPoint> out;
  out.reserve(mesh.num_cells() * rule.points.size());
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    const double area = mesh.signed_area(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      out.push_back({c, rule.points[q], to_physical(mesh, c, rule.points[q]), rule.weights[q] * area});
    }
  }
  return out;
}

std::vector<QuadPoint> quadrature_outside_disk(const Mesh& mesh, Point2 center, double radius, int cut_levels) {
  std::vector<QuadPoint> out;
  out.reserve(mesh.num_cells() * 7);
  const SubTriangle whole{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}};
  for (std::size_t ci = 0; ci < mesh.num_cells(); ++ci) {
    const int c = static_cast<int>(ci);
    append_sub_rule(mesh, c, whole, mesh.signed_area(c), center, radius, cut_levels, out);
  }
  return out;
}

}  // namespace dcell
