#include "dcell/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "dcell/analytic.hpp"
#include "dcell/csv.hpp"

namespace dcell::cli {

namespace {

const std::map<std::string, Mode>& mode_names() {
  static const std::map<std::string, Mode> names{
      {"mesh", Mode::Mesh},       {"run-exclusion", Mode::RunExclusion},     {"run-point", Mode::RunPoint},
      {"compare", Mode::Compare}, {"analytic-checks", Mode::AnalyticChecks}, {"fig2", Mode::Fig2},
      {"fig3", Mode::Fig3}};
  return names;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Every task runs to
/// completion; the exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, int jobs, F task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < count; ++k) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) throw ConfigError("out", "cannot create directory " + config.out.string() + ": " + ec.message());
}

void write_snapshots(const Mesh& mesh, const std::vector<Snapshot>& snaps, const std::filesystem::path& dir,
                     const std::string& prefix, std::ostream& log) {
  for (const auto& s : snaps) {
    const auto path = dir / (prefix + "_t" + short_number(s.t) + ".vtk");
    write_vtk(mesh, path, s.field.values(), "concentration");
    log << "wrote " << path.string() << '\n';
  }
}

double e1_by_quadrature(double x) {
  // E1(x) = int_0^inf exp(-x e^v) dv; beyond v_max the integrand is below e^-745
  const double v_max = std::log(745.0 / x);
  if (v_max <= 0.0) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [x](double s) { return std::exp(-x * s) / s; }, 1.0, std::numeric_limits<double>::infinity(), 20, 1e-14);
  }
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [x](double v) { return std::exp(-x * std::exp(v)); }, 0.0, v_max, 20, 1e-14);
}

}  // namespace

const char* to_string(Mode m) {
  for (const auto& [name, mode] : mode_names()) {
    if (mode == m) return name.c_str();
  }
  return "?";
}

double RunConfig::sigma() const { return eps_is_variance ? std::sqrt(eps) : eps; }

CellSpec RunConfig::cell() const { return CellSpec{center, radius, phi, uptake}; }

ExclusionConfig RunConfig::exclusion() const {
  ExclusionConfig c;
  c.diffusion = diffusion;
  c.cell = cell();
  c.dt = dt;
  c.t_end = t_end;
  c.rel_tol = rel_tol;
  c.stop_at_steady = true;
  c.snapshot_times = snapshot_times;
  return c;
}

PointConfig RunConfig::point() const {
  PointConfig c;
  c.diffusion = diffusion;
  c.cell = cell();
  c.dt = dt;
  c.t_end = t_end;
  c.sigma = sigma();
  c.quad_points = nq;
  c.coupling = coupling;
  c.rel_tol = rel_tol;
  c.stop_at_steady = true;
  c.snapshot_times = snapshot_times;
  return c;
}

ComparisonConfig RunConfig::comparison() const {
  ComparisonConfig c;
  c.diffusion = diffusion;
  c.cell = cell();
  c.side_length = side;
  c.h = h;
  c.dt = dt;
  c.t_end = t_end;
  c.sigma = sigma();
  c.quad_points = nq;
  c.coupling = coupling;
  c.rel_tol = rel_tol;
  return c;
}

std::string RunConfig::describe() const {
  std::string s = "mode=" + std::string(to_string(mode));
  auto add = [&s](const char* key, double v) { s += std::string(" ") + key + "=" + format_number(v); };
  add("d", diffusion);
  add("phi", phi);
  add("a", uptake);
  s += " center=" + format_number(center.x) + "," + format_number(center.y);
  add("radius", radius);
  add("l", side);
  add("h", h);
  add("dt", dt);
  add("t_end", t_end);
  add("eps", eps);
  s += std::string(" eps_is_variance=") + (eps_is_variance ? "true" : "false");
  add("sigma", sigma());
  s += " nq=" + std::to_string(nq);
  s += std::string(" coupling=") + dcell::to_string(coupling);
  add("rel_tol", rel_tol);
  return s;
}

void RunConfig::validate() const {
  auto finite = [](const char* key, double v) {
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  };
  finite("d", diffusion);
  finite("phi", phi);
  finite("a", uptake);
  finite("center", center.x);
  finite("center", center.y);
  if (!(diffusion > 0.0)) throw ConfigError("d", "diffusion coefficient must be positive");
  if (!(uptake >= 0.0)) throw ConfigError("a", "uptake rate must be non-negative");
  if (!(radius > 0.0)) throw ConfigError("radius", "must be positive");
  if (!(side > 0.0)) throw ConfigError("l", "must be positive");
  if (!(h > 0.0 && h <= 0.5 * side)) throw ConfigError("h", "must lie in (0, l/2]");
  if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (!(t_end >= dt)) throw ConfigError("t-end", "must be at least dt");
  if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
  if (nq < 16) throw ConfigError("nq", "need at least 16 quadrature points");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel-tol", "must lie in (0, 1)");
  if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
  const double clearance = std::min({center.x, center.y, side - center.x, side - center.y}) - radius;
  if (!(clearance >= 2.0 * h)) throw ConfigError("center", "cell disk needs a clearance of 2*h from the walls");
  for (double t : snapshot_times) {
    if (!(t >= 0.0)) throw ConfigError("snapshot-times", "times must be non-negative");
  }
}

RunConfig load_config(int argc, const char* const* argv) {
  RunConfig c;
  std::string mode = "compare";
  std::vector<double> center{c.center.x, c.center.y};
  std::string coupling = "implicit";
  std::string out = c.out.string();

  CLI::App app{"Cell secretion: spatial exclusion vs point source diffusion models", "dirac-cell"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_config("--config", "", "TOML file with flat keys named like the long options");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::vector<std::string> names;
  for (const auto& kv : mode_names()) names.push_back(kv.first);
  app.add_option("mode", mode, "what to run")->required()->check(CLI::IsMember(names));
  app.add_option("--d", c.diffusion, "diffusion coefficient D");
  app.add_option("--a", c.uptake, "uptake rate a (>= 0)");
  app.add_option("--phi", c.phi, "flux density phi on the cell boundary");
  app.add_option("--radius", c.radius, "cell radius R");
  app.add_option("--center", center, "cell centre X,Y")->delimiter(',')->expected(2);
  app.add_option("--l", c.side, "side length of the square");
  app.add_option("--h", c.h, "target mesh size");
  app.add_option("--dt", c.dt, "time step");
  app.add_option("--t-end,--t_end", c.t_end, "final time");
  app.add_option("--eps", c.eps, "width of the Gaussian load");
  app.add_flag("--eps-is-variance,--eps_is_variance", c.eps_is_variance, "read --eps as a variance");
  app.add_option("--nq", c.nq, "quadrature points on the virtual boundary");
  app.add_option("--coupling", coupling, "Psi coupling")->check(CLI::IsMember({"implicit", "lag"}));
  app.add_option("--rel-tol,--rel_tol", c.rel_tol, "linear solver relative tolerance");
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", c.jobs, "concurrent runs for sweeps");
  app.add_option("--snapshot-times,--snapshot_times", c.snapshot_times, "VTK snapshot times")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError("arguments", e.what());
  }
  c.mode = mode_names().at(mode);
  c.center = {center.at(0), center.at(1)};
  c.coupling = coupling == "lag" ? Coupling::ExplicitLag : Coupling::Implicit;
  c.out = out;
  c.validate();
  return c;
}

std::vector<CheckResult> analytic_checks() {
  using namespace analytic;
  const double pi = std::numbers::pi;
  std::vector<CheckResult> out;

  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = 1e-6 * std::pow(50.0 / 1e-6, i / 49.0);
    const double ref = e1_by_quadrature(x);
    worst = std::max(worst, std::abs(exp_integral_e1(x) - ref) / ref);
  }
  out.push_back({"e1_vs_quadrature_max_rel_err", worst, 0.0, 1e-8, worst <= 1e-8});
  const double e1_one = exp_integral_e1(1.0);
  const double e1_ref = e1_by_quadrature(1.0);
  out.push_back({"e1_at_1", e1_one, e1_ref, 1e-8, std::abs(e1_one - e1_ref) <= 1e-8});

  const auto rep = summability_diagnostics(1000);
  const double zeta4 = std::pow(pi, 4) / 90.0;
  out.push_back({"zeta4_partial_1000", rep.zeta4_partial, zeta4, 5e-7, std::abs(rep.zeta4_partial - zeta4) < 5e-7});

  const int ns[] = {100, 200, 400, 800};
  const auto growth = double_sum_growth(ns);
  out.push_back({"double_sum_log_fit_r2", growth.r_squared, 1.0, 0.01, growth.r_squared > 0.99});
  out.push_back({"double_sum_log_slope", growth.slope, pi / 4.0, 0.25 * pi / 4.0,
                 std::abs(growth.slope - pi / 4.0) <= 0.25 * pi / 4.0});

  // the square-domain solution minus the free-space one stays bounded at the source
  const Point2 src{pi / 2.0, pi / 2.0};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 1; k <= 5; ++k) {
    const double r = std::pow(10.0, -k);
    const Point2 p{src.x + r * std::cos(0.3), src.y + r * std::sin(0.3)};
    const double d = point_solution(p, 1.0, src) - freespace_solution(p - src, 1.0);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  out.push_back({"series_minus_freespace_spread", hi - lo, 0.0, 1e-2, std::isfinite(hi - lo) && hi - lo < 1e-2});

  const double radii[] = {0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};
  const auto prof = singularity_profile(1.0, radii);
  const double slope_ref = 1.0 / (2.0 * pi);
  out.push_back({"singularity_slope", prof.fit.slope, slope_ref, 0.15 * slope_ref,
                 std::abs(prof.fit.slope - slope_ref) <= 0.15 * slope_ref});
  return out;
}

void cmd_mesh(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const Mesh full = build_square_mesh(config.side, config.h);
  const Mesh tilde = build_punctured_square_mesh(config.side, config.h, config.cell());
  CsvWriter csv(config.out / "mesh_quality.csv", config.describe(),
                "mesh,vertices,cells,min_angle_deg,max_aspect,avg_edge_length,cell_edges,cell_perimeter,area");
  for (const auto& [name, mesh] : {std::pair<const char*, const Mesh*>{"full", &full}, {"punctured", &tilde}}) {
    if (auto bad = check_invariants(*mesh); !bad.empty()) throw MeshError(std::string(name) + " mesh: " + bad.front());
    const auto q = mesh_quality(*mesh);
    const bool has_cell = mesh->count_edges(BoundaryTag::Cell) > 0;
    csv.raw_row(std::string(name) + "," + std::to_string(q.num_vertices) + "," + std::to_string(q.num_cells) + "," +
                format_number(q.min_angle_deg) + "," + format_number(q.max_aspect) + "," +
                format_number(q.avg_edge_length) + "," + std::to_string(mesh->count_edges(BoundaryTag::Cell)) + "," +
                format_number(has_cell ? mesh->boundary_length(BoundaryTag::Cell) : 0.0) + "," +
                format_number(mesh->total_area()));
    write_vtk(*mesh, config.out / (std::string("mesh_") + name + ".vtk"));
    write_boundary_vtk(*mesh, config.out / (std::string("mesh_") + name + "_boundary.vtk"));
    log << name << ": " << q.num_vertices << " vertices, " << q.num_cells << " cells, min angle "
        << short_number(q.min_angle_deg) << " deg, mean edge " << short_number(q.avg_edge_length) << '\n';
  }
}

void cmd_run_exclusion(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const Mesh mesh = build_punctured_square_mesh(config.side, config.h, config.cell());
  const auto result = run_exclusion(mesh, config.exclusion());
  CsvWriter csv(config.out / "exclusion.csv", config.describe(), "t,l2_tilde,h1_semi,mass,flux,steady");
  for (const auto& r : result.records) csv.row({r.t, r.l2_tilde, r.h1_semi, r.mass, r.exchange, r.steady ? 1.0 : 0.0});
  write_snapshots(mesh, result.snapshots, config.out, "exclusion", log);
  const auto& last = result.records.back();
  log << "exclusion: t=" << short_number(last.t) << " l2=" << short_number(last.l2_tilde)
      << (result.reached_steady ? " (steady)" : "") << '\n';
}

void cmd_run_point(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const Mesh mesh = build_square_mesh(config.side, config.h);
  const auto result = run_point(mesh, config.point());
  CsvWriter csv(config.out / "point.csv", config.describe(), "t,l2_full,l2_tilde,h1_semi_tilde,mass,psi,steady");
  for (const auto& r : result.records) {
    csv.row({r.t, r.l2_full, r.l2_tilde, r.h1_semi, r.mass, r.exchange, r.steady ? 1.0 : 0.0});
  }
  write_snapshots(mesh, result.snapshots, config.out, "point", log);
  const auto& last = result.records.back();
  log << "point: t=" << short_number(last.t) << " l2_tilde=" << short_number(last.l2_tilde)
      << " psi=" << short_number(last.exchange) << (result.reached_steady ? " (steady)" : "") << '\n';
}

namespace {

void write_comparison(const ComparisonSeries& s, const std::filesystem::path& path, const std::string& comment) {
  CsvWriter csv(path, comment, "t,e_l2,abs_l2,abs_h1semi,l2_uS,l2_uP,psi,steady");
  for (const auto& r : s.rows) csv.row({r.t, r.e_l2, r.abs_l2, r.abs_h1, r.l2_s, r.l2_p, r.psi, r.steady ? 1.0 : 0.0});
}

}  // namespace

void cmd_compare(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const auto series = run_comparison(config.comparison());
  write_comparison(series, config.out / "comparison.csv", config.describe());
  log << "compare: discarded " << series.discarded_points << " of " << series.total_points
      << " quadrature points inside the disk\n";
  log << "compare: final e_l2=" << short_number(series.summary.final_e_l2)
      << " time_to_threshold=" << format_number(series.summary.time_to_threshold) << '\n';
}

int cmd_analytic_checks(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const auto checks = analytic_checks();
  bool ok = true;
  {
    CsvWriter csv(config.out / "analytic_checks.csv", config.describe(), "check,value,reference,tolerance,pass");
    for (const auto& c : checks) {
      csv.raw_row(c.name + "," + format_number(c.value) + "," + format_number(c.reference) + "," +
                  format_number(c.tolerance) + "," + (c.pass ? "1" : "0"));
      log << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_number(c.value)
          << " reference=" << format_number(c.reference) << " tol=" << format_number(c.tolerance) << '\n';
      ok = ok && c.pass;
    }
  }
  CsvWriter table(config.out / "analytic_freespace.csv", config.describe(), "x,t,value");
  for (double t : {0.1, 1.0, 10.0}) {
    for (int i = 0; i <= 40; ++i) {
      const double x = 1e-3 * std::pow(1e4, i / 40.0);
      table.row({x, t, analytic::freespace_solution({x, 0.0}, t)});
    }
  }
  return ok ? kOk : kCheckFailed;
}

void cmd_fig2(const RunConfig& config, std::ostream& log) {
  if (config.uptake == 0.0) {
    throw ConfigError("a", "fig2 needs uptake a > 0 (with a = 0 there is no steady state); use run-exclusion or "
                           "run-point to follow the growing solution");
  }
  ensure_out_dir(config);
  RunResult excl, point;
  parallel_for(2, config.jobs, [&](std::size_t i) {
    if (i == 0) {
      const Mesh mesh = build_punctured_square_mesh(config.side, config.h, config.cell());
      excl = run_exclusion(mesh, config.exclusion());
    } else {
      const Mesh mesh = build_square_mesh(config.side, config.h);
      point = run_point(mesh, config.point());
    }
  });
  for (const auto& [name, res] : {std::pair<const char*, const RunResult*>{"exclusion", &excl}, {"point", &point}}) {
    CsvWriter csv(config.out / (std::string("fig2_") + name + ".csv"), config.describe(), "t,l2_tilde,mass,flux_or_psi");
    for (const auto& r : res->records) csv.row({r.t, r.l2_tilde, r.mass, r.exchange});
    log << "fig2 " << name << ": final t=" << short_number(res->records.back().t)
        << " l2_tilde=" << short_number(res->records.back().l2_tilde) << (res->reached_steady ? " (steady)" : "")
        << '\n';
  }
  const double plateau = std::sqrt(config.side * config.side - std::numbers::pi * config.radius * config.radius) *
                         config.phi / config.uptake;
  log << "fig2: steady value sqrt(|domain|) * phi / a = " << short_number(plateau) << '\n';
}

void cmd_fig3(const RunConfig& config, std::ostream& log) {
  ensure_out_dir(config);
  const double ds[] = {0.1, 1.0, 10.0};
  const double as[] = {0.0, 1.0};
  std::vector<RunConfig> runs;
  for (double d : ds) {
    for (double a : as) {
      RunConfig r = config;
      r.diffusion = d;
      r.uptake = a;
      runs.push_back(r);
    }
  }
  std::vector<ComparisonSeries> results(runs.size());
  std::mutex log_mutex;
  parallel_for(runs.size(), config.jobs, [&](std::size_t i) {
    results[i] = run_comparison(runs[i].comparison());
    const std::lock_guard lock(log_mutex);
    log << "fig3 d=" << short_number(runs[i].diffusion) << " a=" << short_number(runs[i].uptake) << " done\n";
  });
  CsvWriter summary(config.out / "fig3_summary.csv", config.describe(),
                    "d,a,threshold,time_to_threshold,final_e_l2,discarded_points");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto name = "fig3_d" + short_number(runs[i].diffusion) + "_a" + short_number(runs[i].uptake) + ".csv";
    write_comparison(results[i], config.out / name, runs[i].describe());
    const auto& s = results[i].summary;
    summary.row({runs[i].diffusion, runs[i].uptake, s.threshold, s.time_to_threshold, s.final_e_l2,
                 static_cast<double>(results[i].discarded_points)});
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    switch (config.mode) {
      case Mode::Mesh: cmd_mesh(config, out); break;
      case Mode::RunExclusion: cmd_run_exclusion(config, out); break;
      case Mode::RunPoint: cmd_run_point(config, out); break;
      case Mode::Compare: cmd_compare(config, out); break;
      case Mode::AnalyticChecks: return cmd_analytic_checks(config, out);
      case Mode::Fig2: cmd_fig2(config, out); break;
      case Mode::Fig3: cmd_fig3(config, out); break;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return kOk;
}

}  // namespace dcell::cli
