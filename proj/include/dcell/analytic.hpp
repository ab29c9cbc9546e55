#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcell/mesh.hpp"

/// Closed-form and series reference solutions for a unit point source.
///
/// Square-domain results use the normalised box (0, pi)^2 with D = 1 and a
/// source that releases one unit of mass per unit time.
namespace dcell::analytic {

inline constexpr double kEulerGamma = std::numbers::egamma;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A requested series accuracy needs more terms than the configured cap.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// E1(x) = int_1^inf exp(-x s) / s ds for x > 0.
double exp_integral_e1(double x);

namespace detail {
/// The two branches of exp_integral_e1, switched at x = 1.
double e1_series(double x);
double e1_continued_fraction(double x);
}  // namespace detail

/// (1/4pi) E1(|x|^2 / 4t): the free-space field of a unit source at the
/// origin switched on at t = 0.
double freespace_solution(Point2 x, double t);

/// Truncation order of the cosine series at time t: the smallest M with
/// sum_{m>M} 2 exp(-m^2 t) / pi^2 < tol. Throws TruncationError above `cap`.
int heat_kernel_order(double t, double tol = 1e-14, int cap = 4096);

/// Neumann heat kernel of (0, pi)^2 as a truncated double cosine series.
double neumann_heat_kernel(Point2 x, Point2 x0, double t);
double neumann_heat_kernel(Point2 x, Point2 x0, double t, int m_max);

/// One-dimensional Neumann kernel on (0, pi). Uses reflected images for
/// small t and the cosine series otherwise, so it is accurate for any t > 0.
double neumann_kernel_1d(double x, double x0, double t);

/// Literal series of the point-source solution (phi = 1, a = 0, u0 = 0)
/// truncated at m, n <= m_max. The double sum converges only conditionally
/// away from the source, so the error decays slowly in m_max.
double series_point_solution(Point2 x, double t, Point2 source, int m_max);

/// The same solution evaluated as int_0^t k_s(x, xi) k_s(y, eta) ds, which
/// is accurate to about `tol` relative.
double point_solution(Point2 x, double t, Point2 source, double tol = 1e-10);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Integral of f over the annulus r_in < |p - center| < r_out on a polar
/// grid: `angular` equispaced angles, adaptive Gauss-Kronrod in log(rho).
double polar_integral(const std::function<double(Point2)>& f, Point2 center, double r_in, double r_out,
                      int angular = 512);

struct SingularityProfile {
  std::vector<double> radii;
  std::vector<double> seminorm;  // |u|_{H1} over the complement of B_r
  std::vector<double> l2;        // ||u||_{L2} over the complement of B_r
  LinearFit fit;                 // seminorm^2 against log(1/r)
};

/// Free-space profile over R^2 minus B_r for decreasing radii.
SingularityProfile singularity_profile(double t, std::span<const double> radii);

/// Exact seminorm^2 of the free-space field over R^2 minus B_r:
/// (1/4pi) E1(r^2 / 2t).
double freespace_seminorm_squared(double r, double t);

struct SummabilityReport {
  int n = 0;
  double zeta4_partial = 0.0;  // sum_{m<=N} m^-4
  double double_sum = 0.0;     // sum_{m,n<=N} m^2 / (m^2 + n^2)^2
};

SummabilityReport summability_diagnostics(int n);

/// Least-squares fit of the double sum against log N.
LinearFit double_sum_growth(std::span<const int> ns);

}  // namespace dcell::analytic
