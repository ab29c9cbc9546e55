#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dcell/compare.hpp"

namespace dcell {
namespace {

constexpr double kPi = std::numbers::pi;

struct DefaultMeshes {
  Mesh full = build_square_mesh(10.0, 0.2495);
  Mesh tilde = build_punctured_square_mesh(10.0, 0.2495, CellSpec{});
  TildeRestriction restriction{full, tilde, {5.0, 5.0}, 0.25};
};

const DefaultMeshes& meshes() {
  static const DefaultMeshes m;
  return m;
}

std::vector<double> sample(const Mesh& mesh, double (*f)(Point2)) {
  const auto u = NodalField::interpolate(mesh, f);
  return u.vector();
}

double affine(Point2 p) { return 1.0 + 0.3 * p.x - 0.2 * p.y; }
double smooth(Point2 p) { return 2.0 + std::sin(0.7 * p.x) * std::cos(0.4 * p.y); }

TEST(TildeRestriction, DiscardFractionBelowOnePercent) {
  const auto& r = meshes().restriction;
  EXPECT_EQ(r.total_points(), 7 * meshes().tilde.num_cells());
  EXPECT_EQ(r.retained_points() + r.discarded_points(), r.total_points());
  EXPECT_LT(static_cast<double>(r.discarded_points()), 0.01 * static_cast<double>(r.total_points()));
}

TEST(TildeRestriction, ConstantIsReproduced) {
  const std::vector<double> c(meshes().full.num_vertices(), 4.25);
  for (double v : meshes().restriction.restrict_values(c)) EXPECT_NEAR(v, 4.25, 1e-13);
}

TEST(TildeRestriction, AffineFieldsAgreeAcrossMeshes) {
  const auto up = sample(meshes().full, affine);
  const auto us = sample(meshes().tilde, affine);
  const auto n = meshes().restriction.norms(up, us);
  EXPECT_LT(n.diff_l2, 1e-12 * n.l2_s);
  EXPECT_LT(n.diff_h1, 1e-11);
  EXPECT_NEAR(n.l2_p, n.l2_s, 1e-12 * n.l2_s);
}

TEST(TildeRestriction, MeasuresTheTildeArea) {
  const std::vector<double> up(meshes().full.num_vertices(), 1.0);
  const std::vector<double> us(meshes().tilde.num_vertices(), 1.0);
  const auto n = meshes().restriction.norms(up, us);
  EXPECT_NEAR(n.l2_s * n.l2_s, 100.0 - kPi / 16.0, 0.005);
  EXPECT_LE(n.l2_s * n.l2_s, meshes().tilde.total_area() + 1e-10);
}

TEST(TildeRestriction, TildeOutsideFullIsGeometryError) {
  const Mesh small = build_square_mesh(8.0, 0.4);
  EXPECT_THROW(TildeRestriction(small, meshes().tilde, {5.0, 5.0}, 0.25), GeometryError);
}

TEST(RelativeDifference, IdenticalFieldsGiveZero) {
  const auto up = sample(meshes().full, affine);
  const auto us = sample(meshes().tilde, affine);
  const auto e = relative_l2_difference(up, us, meshes().restriction);
  ASSERT_TRUE(e);
  EXPECT_LT(*e, 1e-12);
}

TEST(RelativeDifference, DoubledFieldGivesOne) {
  auto up = sample(meshes().full, affine);
  for (double& v : up) v *= 2.0;
  const auto us = sample(meshes().tilde, affine);
  EXPECT_NEAR(*relative_l2_difference(up, us, meshes().restriction), 1.0, 1e-12);
  auto up_smooth = sample(meshes().full, smooth);
  for (double& v : up_smooth) v *= 2.0;
  EXPECT_NEAR(*relative_l2_difference(up_smooth, sample(meshes().tilde, smooth), meshes().restriction), 1.0, 1e-2);
}

TEST(RelativeDifference, UndefinedForZeroReference) {
  const auto up = sample(meshes().full, affine);
  const std::vector<double> us(meshes().tilde.num_vertices(), 0.0);
  EXPECT_FALSE(relative_l2_difference(up, us, meshes().restriction));
}

TEST(RelativeDifference, HomogeneousAndBoundedByTriangleInequality) {
  const auto up = sample(meshes().full, smooth);
  const auto us = sample(meshes().tilde, affine);
  const double e = *relative_l2_difference(up, us, meshes().restriction);
  EXPECT_GT(e, 0.0);
  for (double lambda : {1e-3, 0.5, 7.0}) {
    auto a = up, b = us;
    for (double& v : a) v *= lambda;
    for (double& v : b) v *= lambda;
    EXPECT_NEAR(*relative_l2_difference(a, b, meshes().restriction), e, 1e-12 * e);
  }
  const auto n = meshes().restriction.norms(up, us);
  EXPECT_LE(n.diff_l2, n.l2_s + n.l2_p);
  EXPECT_NEAR(e, n.diff_l2 / n.l2_s, 1e-15);
}

TEST(TimeToThreshold, FirstTimeItStaysBelow) {
  auto rows = [](std::initializer_list<double> es) {
    std::vector<ComparisonRow> r;
    double t = 0.0;
    for (double e : es) {
      ComparisonRow row;
      row.t = t;
      row.e_l2 = e;
      r.push_back(row);
      t += 1.0;
    }
    return r;
  };
  const double nan = std::nan("");
  EXPECT_EQ(time_to_threshold(rows({nan, 0.5, 0.04, 0.06, 0.03, 0.02}), 0.05), 4.0);
  EXPECT_EQ(time_to_threshold(rows({nan, 0.5, 0.04, 0.03}), 0.05), 2.0);
  EXPECT_TRUE(std::isinf(time_to_threshold(rows({nan, 0.5, 0.04, 0.3}), 0.05)));
  EXPECT_TRUE(std::isinf(time_to_threshold(rows({nan, nan}), 0.05)));
  EXPECT_TRUE(std::isinf(time_to_threshold({}, 0.05)));
}

TEST(ComparisonConfig, SubConfigsShareParameters) {
  ComparisonConfig c;
  c.diffusion = 0.1;
  c.cell.uptake = 0.0;
  c.dt = 0.02;
  c.t_end = 3.0;
  c.sigma = 0.05;
  c.coupling = Coupling::ExplicitLag;
  const auto s = c.exclusion();
  const auto p = c.point();
  EXPECT_EQ(s.diffusion, 0.1);
  EXPECT_EQ(p.diffusion, 0.1);
  EXPECT_EQ(s.cell.uptake, 0.0);
  EXPECT_EQ(p.cell.uptake, 0.0);
  EXPECT_EQ(s.dt, p.dt);
  EXPECT_EQ(s.t_end, p.t_end);
  EXPECT_EQ(p.sigma, 0.05);
  EXPECT_EQ(p.coupling, Coupling::ExplicitLag);
  EXPECT_FALSE(s.stop_at_steady);
  EXPECT_FALSE(p.stop_at_steady);
  c.h = 6.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(RunComparison, SharedSteadyStateGivesZeroDifference) {
  ComparisonConfig c;
  c.t_end = 0.4;
  c.initial_value = 1.0;
  c.rel_tol = 1e-12;
  const auto series = run_comparison(c);
  ASSERT_EQ(series.rows.size(), 11u);
  for (const auto& row : series.rows) {
    EXPECT_LT(row.e_l2, 1e-8);
    EXPECT_NEAR(row.psi, 0.0, 1e-9);
  }
  const auto& last = series.rows.back();
  EXPECT_TRUE(last.steady);
  EXPECT_LT(std::abs(last.l2_s - last.l2_p) / last.l2_s, 1e-2);
  EXPECT_NEAR(last.l2_s, std::sqrt(100.0 - kPi / 16.0), 0.02 * std::sqrt(100.0 - kPi / 16.0));
  EXPECT_EQ(series.summary.time_to_threshold, 0.0);
  EXPECT_NEAR(series.summary.steady_time, 0.04, 1e-12);
}

TEST(RunComparison, ZeroStartFlagsFirstRowAndKeepsBounds) {
  ComparisonConfig c;
  c.t_end = 1.0;
  const auto series = run_comparison(c);
  ASSERT_EQ(series.rows.size(), 26u);
  EXPECT_TRUE(std::isnan(series.rows.front().e_l2));
  EXPECT_NEAR(series.rows.front().psi, kPi / 2.0, 1e-15);
  for (std::size_t i = 1; i < series.rows.size(); ++i) {
    const auto& row = series.rows[i];
    EXPECT_GE(row.e_l2, 0.0);
    EXPECT_LE(row.abs_l2, row.l2_s + row.l2_p);
    EXPECT_NEAR(row.e_l2, row.abs_l2 / row.l2_s, 1e-14);
    EXPECT_NEAR(row.t, 0.04 * static_cast<double>(i), 1e-12);
  }
  EXPECT_EQ(series.total_points, meshes().restriction.total_points());
  EXPECT_EQ(series.discarded_points, meshes().restriction.discarded_points());
  EXPECT_EQ(series.summary.final_e_l2, series.rows.back().e_l2);
}

TEST(AnnularSeminorms, AffineFieldGivesAreaOutsideDisk) {
  const auto u = sample(meshes().full, affine);
  const std::vector<double> radii{1.0, 0.5, 0.25};
  const auto s = annular_seminorms(meshes().full, u, {5.0, 5.0}, radii);
  ASSERT_EQ(s.size(), radii.size());
  const double grad2 = 0.3 * 0.3 + 0.2 * 0.2;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double exact = grad2 * (100.0 - kPi * radii[i] * radii[i]);
    EXPECT_NEAR(s[i] * s[i], exact, 1e-3 * grad2 * kPi * radii[i] * radii[i]);
  }
}

}  // namespace
}  // namespace dcell
