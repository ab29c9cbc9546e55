// Acceptance suite: one PASS/FAIL line per primary criterion. Exits nonzero
// when any criterion fails.

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "dcell/analytic.hpp"
#include "dcell/compare.hpp"

namespace {

using namespace dcell;
constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kMassStepRelTol = 1e-9;
constexpr double kMassLinearRelTol = 0.02;
constexpr double kPlateauRelTol = 0.02;
constexpr double kPlateauAgreeTol = 0.01;
constexpr double kPlateauTime = 40.0;
constexpr double kTransientEnd = 5.0;
constexpr double kThreshold = 0.05;
constexpr double kE1RelTol = 1e-8;
constexpr double kZeta4Tol = 5e-7;
constexpr double kGrowthMinR2 = 0.99;
constexpr double kSlopeRelTol = 0.15;
constexpr double kConsistencyTol = 0.05;
constexpr double kConvergenceRelTol = 0.02;
constexpr double kDependenceSlack = 1e-8;

const double kPlateau = std::sqrt(100.0 - kPi * 0.25 * 0.25);

int failures = 0;

void report(bool pass, const char* name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Mesh& tilde_mesh() {
  static const Mesh m = build_punctured_square_mesh(10.0, 0.2495, CellSpec{});
  return m;
}

const Mesh& full_mesh() {
  static const Mesh m = build_square_mesh(10.0, 0.2495);
  return m;
}

ExclusionConfig exclusion_config(double uptake, double t_end) {
  ExclusionConfig c;
  c.cell.uptake = uptake;
  c.t_end = t_end;
  c.stop_at_steady = false;
  return c;
}

PointConfig point_config(double uptake, double t_end, Coupling coupling = Coupling::Implicit) {
  PointConfig c;
  c.cell.uptake = uptake;
  c.t_end = t_end;
  c.coupling = coupling;
  c.stop_at_steady = false;
  return c;
}

// Largest |rate - expected| / |expected| over all steps, where expected is the
// exchange at the new step (implicit) or the previous one (lagged).
double worst_step_balance(const RunResult& r, double dt, bool lagged) {
  double worst = 0.0;
  for (std::size_t n = 1; n < r.records.size(); ++n) {
    const double rate = (r.records[n].mass - r.records[n - 1].mass) / dt;
    const double expected = lagged ? r.records[n - 1].exchange : r.records[n].exchange;
    worst = std::max(worst, std::abs(rate - expected) / std::abs(expected));
  }
  return worst;
}

double worst_linear_mass(const RunResult& r) {
  double worst = 0.0;
  for (const auto& rec : r.records) {
    if (rec.t == 0.0) continue;
    const double expected = 2.0 * kPi * 0.25 * rec.t;
    worst = std::max(worst, std::abs(rec.mass - expected) / expected);
  }
  return worst;
}

void mass_balance() {
  // The balance is exact up to the linear-solver residual, so it is judged
  // with a solver tolerance well below the balance tolerance; the default
  // tolerance figures are reported alongside.
  constexpr double kBalanceSolverTol = 1e-12;
  const double dt = ExclusionConfig{}.dt;
  auto step_errors = [&](double solver_tol) {
    auto s = exclusion_config(1.0, 40.0);
    auto p = point_config(1.0, 40.0);
    auto l = point_config(1.0, 40.0, Coupling::ExplicitLag);
    s.rel_tol = p.rel_tol = l.rel_tol = solver_tol;
    return std::array<double, 3>{worst_step_balance(run_exclusion(tilde_mesh(), s), dt, false),
                                 worst_step_balance(run_point(full_mesh(), p), dt, false),
                                 worst_step_balance(run_point(full_mesh(), l), dt, true)};
  };
  const auto tight = step_errors(kBalanceSolverTol);
  const auto loose = step_errors(ExclusionConfig{}.rel_tol);
  const double s_lin = worst_linear_mass(run_exclusion(tilde_mesh(), exclusion_config(0.0, 40.0)));
  const double p_lin = worst_linear_mass(run_point(full_mesh(), point_config(0.0, 40.0)));
  const bool pass = std::max({tight[0], tight[1], tight[2]}) < kMassStepRelTol && std::max(s_lin, p_lin) < kMassLinearRelTol;
  report(pass, "mass_balance",
         fmt("per-step rel err at solver tol %.0e: S %.2e, P implicit %.2e, P lag %.2e (tol %.0e; at default solver "
             "tol %.0e: %.2e, %.2e, %.2e); a=0 mass vs 2piR t: S %.4f, P %.2e (tol %.2f)",
             kBalanceSolverTol, tight[0], tight[1], tight[2], kMassStepRelTol, ExclusionConfig{}.rel_tol, loose[0],
             loose[1], loose[2], s_lin, p_lin, kMassLinearRelTol));
}

void steady_state() {
  const auto s = run_exclusion(tilde_mesh(), exclusion_config(1.0, kPlateauTime));
  const auto p = run_point(full_mesh(), point_config(1.0, kPlateauTime));
  const double ls = s.records.back().l2_tilde;
  const double lp = p.records.back().l2_tilde;
  const double es = std::abs(ls - kPlateau) / kPlateau;
  const double ep = std::abs(lp - kPlateau) / kPlateau;
  const double agree = std::abs(ls - lp) / ls;
  report(es < kPlateauRelTol && ep < kPlateauRelTol && agree < kPlateauAgreeTol, "steady_state",
         fmt("t=%g: l2_tilde S %.4f, P %.4f vs %.4f (rel %.3f, %.3f, tol %.2f); S/P agree %.2e (tol %.2f)",
             kPlateauTime, ls, lp, kPlateau, es, ep, kPlateauRelTol, agree, kPlateauAgreeTol));

  // How long the plateau actually takes on the same setup.
  ExclusionSimulation sim_s(tilde_mesh(), exclusion_config(1.0, 1000.0));
  PointSimulation sim_p(full_mesh(), point_config(1.0, 1000.0));
  const double band = (1.0 - kPlateauRelTol) * kPlateau;
  double ts = std::numeric_limits<double>::infinity(), tp = ts;
  while (sim_s.steps_taken() < sim_s.total_steps() && (std::isinf(ts) || std::isinf(tp))) {
    sim_s.advance();
    sim_p.advance();
    if (std::isinf(ts) && sim_s.record().l2_tilde >= band) ts = sim_s.time();
    if (std::isinf(tp) && sim_p.record().l2_tilde >= band) tp = sim_p.time();
  }
  const double rs = sim_s.record().l2_tilde, rp = sim_p.record().l2_tilde;
  std::printf("INFO steady_state_horizon: 2%% band first reached at t=%.2f (S), t=%.2f (P); there S %.4f, P %.4f, "
              "agree %.2e\n",
              ts, tp, rs, rp, std::abs(rs - rp) / rs);
}

void ordering() {
  const double ds[] = {0.1, 1.0, 10.0};
  const double as[] = {0.0, 1.0};
  std::vector<ComparisonSeries> runs;
  for (double a : as) {
    for (double d : ds) {
      ComparisonConfig c;
      c.diffusion = d;
      c.cell.uptake = a;
      runs.push_back(run_comparison(c, kThreshold));
    }
  }
  int violations = 0;
  for (int ai = 0; ai < 2; ++ai) {
    const auto& lo = runs[static_cast<std::size_t>(3 * ai)];
    const auto& mid = runs[static_cast<std::size_t>(3 * ai + 1)];
    const auto& hi = runs[static_cast<std::size_t>(3 * ai + 2)];
    for (std::size_t n = 0; n < lo.rows.size(); ++n) {
      if (lo.rows[n].t <= kTransientEnd) continue;
      if (!(hi.rows[n].e_l2 <= mid.rows[n].e_l2 && mid.rows[n].e_l2 <= lo.rows[n].e_l2)) ++violations;
    }
  }
  const double t0 = runs[1].summary.time_to_threshold;  // D = 1, a = 0
  const double t1 = runs[4].summary.time_to_threshold;  // D = 1, a = 1
  report(violations == 0 && std::isfinite(t1) && t1 <= t0, "relative_difference_ordering",
         fmt("ordering violations for t>%g: %d; D=1 time to e<%.2f: a=1 %.2f, a=0 %.2f; final e (a=1) D=0.1 %.4f, "
             "D=1 %.4f, D=10 %.4f",
             kTransientEnd, violations, kThreshold, t1, t0, runs[3].summary.final_e_l2, runs[4].summary.final_e_l2,
             runs[5].summary.final_e_l2));
}

double e1_by_quadrature(double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto head = [](double v) { return std::exp(-std::exp(v)); };
  auto tail = [](double u) { return std::exp(-u) / u; };
  return gauss_kronrod<double, 61>::integrate(head, std::log(std::min(x, 1.0)), 0.0, 15, 1e-15) +
         gauss_kronrod<double, 61>::integrate(tail, std::max(x, 1.0), std::numeric_limits<double>::infinity(), 15,
                                              1e-15);
}

void analytic_oracles() {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = 1e-6 * std::pow(50.0 / 1e-6, i / 49.0);
    const double ref = e1_by_quadrature(x);
    worst = std::max(worst, std::abs(analytic::exp_integral_e1(x) - ref) / ref);
  }
  const double zeta = analytic::summability_diagnostics(1000).zeta4_partial;
  const double zeta_err = std::abs(zeta - std::pow(kPi, 4) / 90.0);
  const int ns[] = {100, 200, 400, 800};
  const auto growth = analytic::double_sum_growth(ns);
  report(worst < kE1RelTol && zeta_err < kZeta4Tol && growth.r_squared > kGrowthMinR2, "analytic_oracles",
         fmt("E1 max rel err %.2e (tol %.0e); zeta4 partial err %.2e (tol %.0e); double sum vs log N slope %.4f, "
             "R^2 %.6f (min %.2f)",
             worst, kE1RelTol, zeta_err, kZeta4Tol, growth.slope, growth.r_squared, kGrowthMinR2));
}

void singularity() {
  std::vector<double> radii;
  for (int k = 0; k < 10; ++k) radii.push_back(0.1 * std::pow(10.0, -k / 3.0));
  const auto profile = analytic::singularity_profile(1.0, radii);
  const double target = 1.0 / (2.0 * kPi);
  const double slope_err = std::abs(profile.fit.slope - target) / target;

  const double h = 0.2495;
  auto config = point_config(1.0, 1.0);
  config.snapshot_times = {1.0};
  const auto run = run_point(full_mesh(), config);
  std::vector<double> r_fem;
  for (int k = 4; k >= 0; --k) r_fem.push_back(2.0 * h * std::pow(2.0, k / 2.0));
  const auto semi = annular_seminorms(full_mesh(), run.snapshots.at(0).field.values(), {5.0, 5.0}, r_fem);
  bool increasing = true, convex = true;
  std::string values;
  for (std::size_t i = 0; i < semi.size(); ++i) {
    values += fmt("%s%.4f", i ? " " : "", semi[i] * semi[i]);
    if (i > 0 && !(semi[i] > semi[i - 1])) increasing = false;
    if (i > 1) {
      const double d1 = semi[i - 1] * semi[i - 1] - semi[i - 2] * semi[i - 2];
      const double d2 = semi[i] * semi[i] - semi[i - 1] * semi[i - 1];
      if (!(d2 > d1)) convex = false;
    }
  }
  report(slope_err < kSlopeRelTol && increasing && convex, "singularity_signature",
         fmt("free-space slope %.5f vs 1/2pi %.5f (rel %.3f, tol %.2f); FEM |u|^2 over r=%.3f..%.3f: %s "
             "(increasing %s, convex in log r %s)",
             profile.fit.slope, target, slope_err, kSlopeRelTol, r_fem.front(), r_fem.back(), values.c_str(),
             increasing ? "yes" : "no", convex ? "yes" : "no"));
}

void model_consistency() {
  const Point2 c{1.3, 1.9};
  const Mesh mesh = build_square_mesh(kPi, 0.1);
  PointConfig config;
  config.cell.center = c;
  config.cell.uptake = 0.0;
  config.dt = 0.01;
  config.t_end = 1.0;
  config.stop_at_steady = false;
  config.snapshot_times = {1.0};
  const auto run = run_point(mesh, config);
  const auto& u = run.snapshots.at(0).field;
  const double amplitude = 2.0 * kPi * config.cell.radius * config.cell.phi;
  double diff = 0.0, ref = 0.0;
  for (const auto& q : quadrature_outside_disk(mesh, c, 0.5)) {
    const double exact = amplitude * analytic::point_solution(q.x, 1.0, c);
    const double fem = interpolate_at(u.values(), mesh, q.cell, q.bary);
    diff += q.weight * (fem - exact) * (fem - exact);
    ref += q.weight * exact * exact;
  }
  const double rel = std::sqrt(diff / ref);
  report(rel < kConsistencyTol, "model_consistency",
         fmt("(0,pi)^2, h=0.1, dt=0.01, t=1: rel L2 error vs series solution outside B_0.5 = %.2e (tol %.2f)", rel,
             kConsistencyTol));
}

double plateau_change_s(double h, double dt) {
  const Mesh m = build_punctured_square_mesh(10.0, h, CellSpec{});
  auto c = exclusion_config(1.0, 10.0);
  c.dt = dt;
  return run_exclusion(m, c).records.back().l2_tilde;
}

double plateau_change_p(double h, double dt) {
  const Mesh m = build_square_mesh(10.0, h);
  auto c = point_config(1.0, 10.0);
  c.dt = dt;
  return run_point(m, c).records.back().l2_tilde;
}

template <class Sim, class Config>
double dependence(const Mesh& mesh, Config config, double delta) {
  config.rel_tol = 1e-12;
  config.snapshot_times = {config.t_end};
  auto p = NodalField::interpolate(mesh, [](Point2 x) { return std::cos(0.3 * x.x) * std::sin(0.5 * x.y) + 0.5; });
  const auto mass = assemble_mass(mesh);
  const double norm = l2_norm(p.values(), mass);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] *= delta / norm;
  RunResult a, b;
  if constexpr (std::is_same_v<Sim, ExclusionSimulation>) {
    a = run_exclusion(mesh, config);
    b = run_exclusion(mesh, config, p);
  } else {
    a = run_point(mesh, config);
    b = run_point(mesh, config, p);
  }
  std::vector<double> d(mesh.num_vertices());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b.snapshots.at(0).field[i] - a.snapshots.at(0).field[i];
  return l2_norm(d, mass);
}

void convergence() {
  const double s0 = plateau_change_s(0.2495, 0.04), s1 = plateau_change_s(0.2495 / 2.0, 0.02);
  const double p0 = plateau_change_p(0.2495, 0.04), p1 = plateau_change_p(0.2495 / 2.0, 0.02);
  const double cs = std::abs(s1 - s0) / s0, cp = std::abs(p1 - p0) / p0;
  const double delta = 0.1;
  const double ds = dependence<ExclusionSimulation>(tilde_mesh(), exclusion_config(1.0, 10.0), delta);
  const double dp = dependence<PointSimulation>(full_mesh(), point_config(1.0, 10.0), delta);
  report(cs < kConvergenceRelTol && cp < kConvergenceRelTol && ds <= delta + kDependenceSlack &&
             dp <= delta + kDependenceSlack,
         "convergence_sanity",
         fmt("l2_tilde(t=10) change under h/2, dt/2: S %.2e, P %.2e (tol %.2f); perturbation %.2f gives change at "
             "t=10: S %.3e, P %.3e",
             cs, cp, kConvergenceRelTol, delta, ds, dp));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  auto guarded = [](const char* name, void (*check)()) {
    try {
      check();
    } catch (const std::exception& e) {
      report(false, name, std::string("exception: ") + e.what());
    }
  };
  guarded("mass_balance", mass_balance);
  guarded("steady_state", steady_state);
  guarded("relative_difference_ordering", ordering);
  guarded("analytic_oracles", analytic_oracles);
  guarded("singularity_signature", singularity);
  guarded("model_consistency", model_consistency);
  guarded("convergence_sanity", convergence);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 7 criteria failed (%.1f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
