#include "dcell/records.hpp"

#include <algorithm>
#include <cmath>

#include "dcell/mesh.hpp"

namespace dcell {

bool steady_criterion(double increment_l2, double dt, double previous_l2) {
  return increment_l2 / dt < 1e-8 * std::max(1.0, previous_l2);
}

std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= dt * (1.0 - 1e-12))) throw ParameterError("need dt > 0 and t_end >= dt");
  // tolerate t_end / dt landing a few ulps above an integer
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

}  // namespace dcell
