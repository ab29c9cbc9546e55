#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dcell/exclusion_model.hpp"
#include "dcell/point_model.hpp"

namespace dcell {

/// Evaluates full-square fields at the quadrature nodes of the punctured
/// mesh. Nodes inside the true disk (possible because the punctured mesh
/// only approximates the circle by a polygon) are dropped.
class TildeRestriction {
 public:
  TildeRestriction(const Mesh& full, const Mesh& tilde, Point2 center, double radius);

  [[nodiscard]] std::size_t total_points() const { return total_; }
  [[nodiscard]] std::size_t discarded_points() const { return total_ - nodes_.size(); }
  [[nodiscard]] std::size_t retained_points() const { return nodes_.size(); }

  /// Values of u_P at the retained nodes.
  [[nodiscard]] std::vector<double> restrict_values(std::span<const double> u_p) const;

  struct Norms {
    double l2_s = 0.0;    // ||u_S||
    double l2_p = 0.0;    // ||u_P||
    double diff_l2 = 0.0;  // ||u_P - u_S||
    double diff_h1 = 0.0;  // |u_P - u_S|_{H1}
  };
  [[nodiscard]] Norms norms(std::span<const double> u_p, std::span<const double> u_s) const;

 private:
  struct Node {
    int tilde_cell;
    Bary tilde_bary;
    int full_cell;
    Bary full_bary;
    double weight;
  };
  const Mesh* full_;
  const Mesh* tilde_;
  std::size_t total_ = 0;
  std::vector<Node> nodes_;
};

/// ||u_P - u_S|| / ||u_S|| over the punctured domain; nullopt while u_S = 0.
std::optional<double> relative_l2_difference(std::span<const double> u_p, std::span<const double> u_s,
                                             const TildeRestriction& restriction);

struct ComparisonConfig {
  double diffusion = 1.0;
  CellSpec cell;
  double side_length = 10.0;
  double h = 0.2495;
  double dt = 0.04;
  double t_end = 40.0;
  double sigma = 0.02;
  int quad_points = 64;
  Coupling coupling = Coupling::Implicit;
  double rel_tol = 1e-10;
  double initial_value = 0.0;  // shared constant initial datum

  void validate() const;
  [[nodiscard]] ExclusionConfig exclusion() const;
  [[nodiscard]] PointConfig point() const;
};

struct ComparisonRow {
  double t = 0.0;
  double e_l2 = std::numeric_limits<double>::quiet_NaN();  // NaN while undefined
  double abs_l2 = 0.0;
  double abs_h1 = 0.0;
  double l2_s = 0.0;
  double l2_p = 0.0;
  double psi = 0.0;
  bool steady = false;
};

struct ComparisonSummary {
  double threshold = 0.05;
  double time_to_threshold = std::numeric_limits<double>::infinity();
  double final_e_l2 = std::numeric_limits<double>::quiet_NaN();
  double final_l2_s = 0.0;
  double final_l2_p = 0.0;
  /// First time at which both models met the steady criterion (inf if never).
  double steady_time = std::numeric_limits<double>::infinity();
};

struct ComparisonSeries {
  std::vector<ComparisonRow> rows;
  ComparisonSummary summary;
  std::size_t discarded_points = 0;
  std::size_t total_points = 0;
};

/// First time at which e_l2 drops below `threshold` and stays below it for
/// the rest of the series; inf if that never happens.
double time_to_threshold(const std::vector<ComparisonRow>& rows, double threshold);

/// Steps both models on the same time grid from the same constant datum.
ComparisonSeries run_comparison(const ComparisonConfig& config, double threshold = 0.05);

/// H1 seminorm of a full-mesh field over the square minus B_r, for each r.
std::vector<double> annular_seminorms(const Mesh& mesh, std::span<const double> u, Point2 center,
                                      std::span<const double> radii);

}  // namespace dcell
