#pragma once

#include <array>
#include <vector>

#include "dcell/mesh.hpp"

namespace dcell {

using Bary = std::array<double, 3>;

/// Degree-5 seven-point rule on the reference triangle. Weights sum to one
/// and are to be scaled by the element area.
struct TriangleRule {
  std::array<Bary, 7> points;
  std::array<double, 7> weights;
};

const TriangleRule& degree5_rule();

/// One quadrature node of a mesh-wide rule: cell, barycentric position in
/// that cell, physical location and absolute weight.
struct QuadPoint {
  int cell;
  Bary bary;
  Point2 x;
  double weight;
};

/// Sub-triangle of a cell, given by the barycentric coordinates of its
/// three corners.
using SubTriangle = std::array<Bary, 3>;

std::array<SubTriangle, 4> split4(const SubTriangle& t);
Point2 to_physical(const Mesh& mesh, int cell, const Bary& b);

/// Degree-5 rule on every cell.
std::vector<QuadPoint> cell_quadrature(const Mesh& mesh);

/// Quadrature for the region of the mesh outside the disk B(center, radius).
/// Cells cut by the circle are split `cut_levels` times and sub-nodes inside
/// the disk are dropped; cells entirely inside are skipped.
std::vector<QuadPoint> quadrature_outside_disk(const Mesh& mesh, Point2 center, double radius, int cut_levels = 4);

/// Euclidean distance from p to the closed triangle (a, b, c); zero inside.
double distance_to_triangle(Point2 p, Point2 a, Point2 b, Point2 c);

}  // namespace dcell
