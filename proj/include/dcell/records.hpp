#pragma once

#include <limits>
#include <vector>

#include "dcell/fem.hpp"

namespace dcell {

/// Per-step scalars of a model run.
///
/// `exchange` is the exchange rate evaluated at time t: the discrete boundary
/// flux integral of (phi - a u) for the exclusion model, Psi[u] for the point
/// model. `applied_exchange` is the rate that actually entered the step
/// ending at t; it differs from `exchange` only for lagged coupling.
struct TimeRecord {
  double t = 0.0;
  double l2_tilde = 0.0;
  double l2_full = std::numeric_limits<double>::quiet_NaN();
  double h1_semi = 0.0;
  double mass = 0.0;
  double exchange = 0.0;
  double applied_exchange = 0.0;
  bool steady = false;
};

struct Snapshot {
  double t;
  NodalField field;
};

struct RunResult {
  std::vector<TimeRecord> records;
  std::vector<Snapshot> snapshots;
  bool reached_steady = false;
};

/// Steady-state test shared by both models:
/// ||u_{n+1} - u_n||_L2 / dt < 1e-8 * max(1, ||u_n||_L2).
bool steady_criterion(double increment_l2, double dt, double previous_l2);

/// Number of fixed steps of size dt needed to reach t_end.
std::size_t step_count(double t_end, double dt);

}  // namespace dcell
