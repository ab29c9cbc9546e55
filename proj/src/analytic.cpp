#include "dcell/analytic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace dcell::analytic {

namespace {

using std::numbers::pi;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Upper bound of sum_{m>M} exp(-m^2 t).
double cosine_tail(int m, double t) {
  const double next = m + 1.0;
  return std::exp(-next * next * t) + 0.5 * std::sqrt(pi / t) * std::erfc(next * std::sqrt(t));
}

double kernel_1d_series(double x, double x0, double t, int m_max) {
  double s = 0.0;
  for (int m = 1; m <= m_max; ++m) s += std::exp(-double(m) * m * t) * (std::cos(m * x) * std::cos(m * x0));
  return (1.0 + 2.0 * s) / pi;
}

double gauss_1d(double z, double t) { return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * pi * t); }

// distance from x to the nearest reflected image of x0 in (0, pi)
double image_distance(double x, double x0) {
  return std::min({std::abs(x - x0), x + x0, 2.0 * pi - x - x0});
}

void require_box(Point2 p, const char* what) {
  if (p.x < 0.0 || p.x > pi || p.y < 0.0 || p.y > pi) {
    throw DomainError(std::string(what) + " must lie in [0, pi]^2");
  }
}

}  // namespace

namespace detail {

double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;  // x^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= x / k;
    const double t = (k % 2 == 1 ? term : -term) / k;
    sum += t;
    if (std::abs(t) < kEps * std::abs(sum)) break;
  }
  return -std::log(x) - kEulerGamma + sum;
}

// modified Lentz evaluation of the continued fraction
// E1(x) = e^{-x} / (x + 1 - 1^2 / (x + 3 - 2^2 / (x + 5 - ...)))
double e1_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h * std::exp(-x);
  }
  throw TruncationError("E1 continued fraction did not converge at x = " + std::to_string(x));
}

}  // namespace detail

double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw DomainError("E1 is defined for x > 0 only");
  if (std::isinf(x)) return 0.0;
  return x <= 1.0 ? detail::e1_series(x) : detail::e1_continued_fraction(x);
}

double freespace_solution(Point2 x, double t) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  const double r2 = x.x * x.x + x.y * x.y;
  if (r2 == 0.0) throw DomainError("the free-space solution is singular at the source");
  return exp_integral_e1(r2 / (4.0 * t)) / (4.0 * pi);
}

int heat_kernel_order(double t, double tol, int cap) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  for (int m = 1; m <= cap; ++m) {
    if (2.0 * cosine_tail(m, t) / (pi * pi) < tol) return m;
  }
  throw TruncationError("heat kernel series needs more than " + std::to_string(cap) + " terms at t = " +
                        std::to_string(t));
}

double neumann_heat_kernel(Point2 x, Point2 x0, double t) {
  return neumann_heat_kernel(x, x0, t, heat_kernel_order(t));
}

double neumann_heat_kernel(Point2 x, Point2 x0, double t, int m_max) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  if (m_max < 1) throw DomainError("truncation order must be at least 1");
  require_box(x, "evaluation point");
  require_box(x0, "source point");
  // the double series factorises into two single sums
  return kernel_1d_series(x.x, x0.x, t, m_max) * kernel_1d_series(x.y, x0.y, t, m_max);
}

double neumann_kernel_1d(double x, double x0, double t) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  if (t >= 1.0) return kernel_1d_series(x, x0, t, 7);
  double s = 0.0;
  for (int k = -3; k <= 3; ++k) {
    s += gauss_1d(x - x0 + 2.0 * pi * k, t) + gauss_1d(x + x0 + 2.0 * pi * k, t);
  }
  return s;
}

double series_point_solution(Point2 x, double t, Point2 source, int m_max) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  if (m_max < 1) throw DomainError("truncation order must be at least 1");
  require_box(x, "evaluation point");
  require_box(source, "source point");
  if (x.x == source.x && x.y == source.y) throw DomainError("the series solution is singular at the source");
  const auto n = static_cast<std::size_t>(m_max) + 1;
  std::vector<double> cx(n), cy(n);
  for (std::size_t m = 1; m < n; ++m) {
    const double md = static_cast<double>(m);
    cx[m] = std::cos(md * x.x) * std::cos(md * source.x);
    cy[m] = std::cos(md * x.y) * std::cos(md * source.y);
  }
  double single = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    const double m2 = static_cast<double>(m * m);
    single += (2.0 - 2.0 * std::exp(-m2 * t)) / m2 * (cx[m] + cy[m]);
  }
  double dbl = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t k = 1; k < n; ++k) {
      const double q = static_cast<double>(m * m + k * k);
      dbl += (4.0 - 4.0 * std::exp(-q * t)) / q * cx[m] * cy[k];
    }
  }
  return (t + single + dbl) / (pi * pi);
}

double point_solution(Point2 x, double t, Point2 source, double tol) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  require_box(x, "evaluation point");
  require_box(source, "source point");
  const double dx = image_distance(x.x, source.x);
  const double dy = image_distance(x.y, source.y);
  const double d2 = dx * dx + dy * dy;
  if (d2 == 0.0) throw DomainError("the point solution is singular at the source");
  // below s_min every image term carries a factor exp(-45) or less
  const double v_lo = std::log(d2 / 180.0);
  const double v_hi = std::log(t);
  if (v_lo >= v_hi) return 0.0;
  auto f = [&](double v) {
    const double s = std::exp(v);
    return s * neumann_kernel_1d(x.x, source.x, s) * neumann_kernel_1d(x.y, source.y, s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, v_lo, v_hi, 20, tol);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs two or more matching samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

double polar_integral(const std::function<double(Point2)>& f, Point2 center, double r_in, double r_out,
                      int angular) {
  if (!(r_in > 0.0) || !(r_out > r_in) || angular < 1) throw DomainError("invalid annulus");
  double total = 0.0;
  for (int j = 0; j < angular; ++j) {
    const double theta = 2.0 * pi * (j + 0.5) / angular;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    auto g = [&](double v) {
      const double rho = std::exp(v);
      return f({center.x + rho * c, center.y + rho * s}) * rho * rho;
    };
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, std::log(r_in), std::log(r_out), 15,
                                                                          1e-11);
  }
  return total * 2.0 * pi / angular;
}

double freespace_seminorm_squared(double r, double t) {
  if (!(r > 0.0) || !(t > 0.0)) throw DomainError("radius and time must be positive");
  return exp_integral_e1(r * r / (2.0 * t)) / (4.0 * pi);
}

SingularityProfile singularity_profile(double t, std::span<const double> radii) {
  if (!(t > 0.0)) throw DomainError("time must be positive");
  if (radii.size() < 2) throw ParameterError("need at least two radii");
  const double r_out = std::sqrt(200.0 * t);
  const double r_min = 1e-6 * std::sqrt(t);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= r_min && radii[i] < r_out)) {
      throw ParameterError("radius " + std::to_string(radii[i]) + " is outside the resolvable range");
    }
    if (i > 0 && !(radii[i] < radii[i - 1])) throw ParameterError("radii must be strictly decreasing");
  }
  auto grad2 = [t](Point2 p) {
    const double r2 = p.x * p.x + p.y * p.y;
    return std::exp(-r2 / (2.0 * t)) / (4.0 * pi * pi * r2);
  };
  auto value2 = [t](Point2 p) {
    const double u = freespace_solution(p, t);
    return u * u;
  };
  SingularityProfile out;
  std::vector<double> x, y;
  for (double r : radii) {
    const double semi2 = polar_integral(grad2, {0.0, 0.0}, r, r_out);
    out.radii.push_back(r);
    out.seminorm.push_back(std::sqrt(semi2));
    out.l2.push_back(std::sqrt(polar_integral(value2, {0.0, 0.0}, r, r_out)));
    x.push_back(std::log(1.0 / r));
    y.push_back(semi2);
  }
  out.fit = fit_line(x, y);
  return out;
}

SummabilityReport summability_diagnostics(int n) {
  if (n < 1) throw ParameterError("partial sum length must be positive");
  SummabilityReport rep;
  rep.n = n;
  // small terms first
  for (int m = n; m >= 1; --m) {
    const double md = m;
    rep.zeta4_partial += 1.0 / (md * md * md * md);
  }
  for (int m = 1; m <= n; ++m) {
    const double m2 = double(m) * m;
    for (int k = 1; k <= n; ++k) {
      const double q = m2 + double(k) * k;
      rep.double_sum += m2 / (q * q);
    }
  }
  return rep;
}

LinearFit double_sum_growth(std::span<const int> ns) {
  std::vector<double> x, y;
  for (int n : ns) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(summability_diagnostics(n).double_sum);
  }
  return fit_line(x, y);
}

}  // namespace dcell::analytic
