#include "breather/ssf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace breather {

namespace {

// Adaptive Gauss-Kronrod on [a, b]; tighter tolerances only chase roundoff.
template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-12);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void require_dim(int dim) { detail::require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3"); }

}  // namespace

long StepFunction::operator()(double x) const {
  if (x > cutoff) throw DomainError("step function queried above its cutoff");
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  if (it == breakpoints.begin()) return 0;
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

long StepFunction::max_abs() const {
  long m = 0;
  for (long v : values) m = std::max(m, std::abs(v));
  return m;
}

long StepFunction::min_value() const {
  long m = 0;
  for (long v : values) m = std::min(m, v);
  return m;
}

StepFunction spectral_shift(const Spectrum& spec0, const Spectrum& spec1) {
  detail::require(spec0.dimension == spec1.dimension, "spectral shift needs operators of equal size");
  StepFunction xi;
  xi.cutoff = std::min(spec0.cutoff, spec1.cutoff);

  std::vector<std::pair<double, int>> jumps;
  for (double x : spec0.eigenvalues)
    if (x <= xi.cutoff) jumps.emplace_back(x, +1);
  for (double x : spec1.eigenvalues)
    if (x <= xi.cutoff) jumps.emplace_back(x, -1);
  std::sort(jumps.begin(), jumps.end());

  long current = 0;
  for (std::size_t i = 0; i < jumps.size();) {
    const double x = jumps[i].first;
    long next = current;
    for (; i < jumps.size() && jumps[i].first == x; ++i) next += jumps[i].second;
    if (next != current) {
      xi.breakpoints.push_back(x);
      xi.values.push_back(next);
      current = next;
    }
  }
  return xi;
}

TestFunction smooth_switch_test_function(double epsilon, double shift) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  const SmoothSwitch rho{epsilon};
  return TestFunction{[rho, shift](double x) { return rho(x - shift); },
                      [rho, shift](double x) { return rho.derivative(x - shift); }, shift + epsilon,
                      {shift - epsilon, shift + epsilon}};
}

KreinResult krein_check(const Spectrum& spec0, const Spectrum& spec1, const TestFunction& g) {
  const double b = g.support_upper;
  if (spec0.cutoff < b || spec1.cutoff < b)
    throw DomainError("spectra must be complete up to the support of g'");
  detail::require(spec0.dimension == spec1.dimension, "operators must have equal size");

  // g is constant above b, so unlisted eigenvalues contribute g(b) each.
  const double gb = g.value(b);
  auto side = [&](const Spectrum& s) {
    double sum = 0.0;
    for (double x : s.eigenvalues) sum += g.value(std::min(x, b));
    return sum + static_cast<double>(s.dimension - s.eigenvalues.size()) * gb;
  };
  KreinResult r;
  r.lhs = side(spec1) - side(spec0);

  const StepFunction xi = spectral_shift(spec0, spec1);
  std::vector<double> knots;
  for (double k : g.knots)
    if (k < b) knots.push_back(k);
  std::sort(knots.begin(), knots.end());
  auto piece = [&](double lo, double hi) {
    double total = 0.0, a = lo;
    for (double k : knots) {
      if (k <= a) continue;
      if (k >= hi) break;
      total += integrate(g.derivative, a, k);
      a = k;
    }
    return total + integrate(g.derivative, a, hi);
  };
  for (std::size_t k = 0; k < xi.breakpoints.size(); ++k) {
    const double lo = xi.breakpoints[k];
    if (lo >= b) break;
    const double hi = k + 1 < xi.breakpoints.size() ? std::min(xi.breakpoints[k + 1], b) : b;
    if (xi.values[k] != 0) r.rhs += static_cast<double>(xi.values[k]) * piece(lo, hi);
  }
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

KreinResult krein_check(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, const TestFunction& g) {
  return krein_check(eigen_lowest(h0, g.support_upper, false), eigen_lowest(h1, g.support_upper, false), g);
}

std::optional<InvarianceResult> invariance_check(const Spectrum& spec0, const Spectrum& spec1, double lambda) {
  detail::require(spec0.dimension == spec1.dimension, "operators must have equal size");
  if (lambda > std::min(spec0.cutoff, spec1.cutoff)) throw DomainError("lambda lies above the completeness cutoff");
  detail::require(lambda <= 700.0, "lambda too large for exponentiated counting");
  const double guard = 1e-12 * (1.0 + std::abs(lambda));
  for (const Spectrum* s : {&spec0, &spec1})
    for (double x : s->eigenvalues)
      if (std::abs(x - lambda) <= guard) return std::nullopt;

  InvarianceResult r;
  r.lhs = static_cast<long>(spec0.count_at_most(lambda)) - static_cast<long>(spec1.count_at_most(lambda));

  // Counting for exp(-H): #{exp(-mu) <= s}; unlisted eigenvalues lie above
  // the cutoff, hence above lambda, and are always counted.
  const double s = std::exp(-lambda);
  auto exp_count = [s](const Spectrum& sp) {
    long n = static_cast<long>(sp.dimension - sp.eigenvalues.size());
    for (double mu : sp.eigenvalues)
      if (std::exp(-mu) <= s) ++n;
    return n;
  };
  r.rhs = -(exp_count(spec0) - exp_count(spec1));
  return r;
}

SingularValueList veff_singular_values(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, double t) {
  detail::require(h0.size() == h1.size(), "operators must have equal size");
  Eigen::MatrixXcd diff = semigroup(h1, t) - semigroup(h0, t);
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  SingularValueList out;
  out.values.reserve(static_cast<std::size_t>(es.eigenvalues().size()));
  for (double v : es.eigenvalues()) out.values.push_back(std::abs(v));
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

double singular_bound(std::size_t n, int dim) {
  require_dim(dim);
  const double threshold = std::pow(4.0, dim);
  if (static_cast<double>(n) <= threshold) throw DomainError("singular value bound requires n > 4^d");
  return (std::pow(2.0 * dim, 0.25) + 1.0) * std::exp(-std::pow(static_cast<double>(n), 1.0 / dim) / 16.0);
}

double ft_derivative(double t, int dim, double x) {
  detail::require(x >= 0.0, "F_t is defined for x >= 0");
  return std::expm1(t * std::pow(x, 1.0 / dim));
}

double ft_eval(double t, int dim, double x) {
  require_dim(dim);
  detail::require(t > 0.0, "t must be positive");
  detail::require(x >= 0.0, "F_t is defined for x >= 0");
  if (x == 0.0) return 0.0;
  if (dim == 1) return std::expm1(t * x) / t - x;
  // Substituting y = u^d removes the root singularity at the origin.
  const double upper = std::pow(x, 1.0 / dim);
  return integrate([t, dim](double u) { return dim * std::pow(u, dim - 1) * std::expm1(t * u); }, 0.0, upper);
}

LegendreValue legendre_gt(double t, int dim, double y) {
  require_dim(dim);
  detail::require(t > 0.0, "t must be positive");
  detail::require(y >= 0.0, "Legendre transform evaluated for y >= 0");
  LegendreValue out;
  if (y == 0.0) return out;

  // x y - F_t(x) is concave and strictly decreasing once F_t'(x) > y.
  double limit = 1.0;
  while (ft_derivative(t, dim, limit) <= y) limit *= 2.0;
  out.search_limit = limit;

  auto objective = [&](double x) { return x * y - ft_eval(t, dim, x); };
  constexpr int kGrid = 256;
  const double step = limit / kGrid;
  int best = 0;
  double best_value = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double v = objective(i * step);
    if (v > best_value) best_value = v, best = i;
  }
  const double lo = std::max(0.0, (best - 1) * step);
  const double hi = std::min(limit, (best + 1) * step);
  const auto [x, neg] = boost::math::tools::brent_find_minima([&](double x) { return -objective(x); }, lo, hi,
                                                              std::numeric_limits<double>::digits / 2);
  out.argmax = -neg > best_value ? x : best * step;
  out.value = std::max(best_value, -neg);
  return out;
}

double ssf_ft_integral(const StepFunction& xi, double upper, double t, int dim) {
  if (upper > xi.cutoff) throw DomainError("integration limit lies above the completeness cutoff");
  std::map<long, double> cache;
  auto f = [&](long v) {
    auto [it, inserted] = cache.emplace(v, 0.0);
    if (inserted) it->second = ft_eval(t, dim, static_cast<double>(std::abs(v)));
    return it->second;
  };
  double total = 0.0;
  for (std::size_t k = 0; k < xi.breakpoints.size(); ++k) {
    const double lo = xi.breakpoints[k];
    if (lo >= upper) break;
    const double hi = k + 1 < xi.breakpoints.size() ? std::min(xi.breakpoints[k + 1], upper) : upper;
    if (xi.values[k] != 0) total += (hi - lo) * f(xi.values[k]);
  }
  return total;
}

double k1_constant(int dim) {
  require_dim(dim);
  return 2.0 * std::pow(32.0, dim) * factorial(dim + 1);
}

double k2_constant(int dim) {
  require_dim(dim);
  return std::pow(32.0, dim);
}

double trace_diff_bound(double b, double sup_gprime, double l1_gprime, int dim) {
  detail::require(sup_gprime >= 0.0 && l1_gprime >= 0.0, "derivative norms must be nonnegative");
  return k1_constant(dim) * std::exp(b) + k2_constant(dim) * std::pow(std::log1p(sup_gprime), dim) * l1_gprime;
}

double weyl_lower_bound(std::size_t n, double volume, int dim) {
  require_dim(dim);
  detail::require(n >= 1, "eigenvalue index starts at 1");
  detail::require(volume > 0.0, "volume must be positive");
  return 2.0 * std::numbers::pi * dim / std::numbers::e * std::pow(static_cast<double>(n) / volume, 2.0 / dim);
}

double counting_bound(double energy, double volume, int dim) {
  require_dim(dim);
  detail::require(volume > 0.0, "volume must be positive");
  if (energy <= 0.0) return 0.0;
  return volume * std::pow(std::numbers::e * energy / (2.0 * std::numbers::pi * dim), 0.5 * dim);
}

MajorizationResult hs_majorization(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, double t, int dim) {
  detail::require(h0.size() == h1.size(), "operators must have equal size");
  auto exponentiated = [](const HamiltonianMatrix& h) {
    auto values = full_spectrum(h, false).eigenvalues;
    for (double& v : values) v = std::exp(-v);
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return spectrum_from_values(std::move(values), n, std::numeric_limits<double>::infinity());
  };
  const StepFunction xi = spectral_shift(exponentiated(h0), exponentiated(h1));

  MajorizationResult r;
  if (!xi.breakpoints.empty()) r.lhs = ssf_ft_integral(xi, xi.breakpoints.back(), t, dim);
  const auto mu = veff_singular_values(h0, h1, 1.0).values;
  double previous = 0.0;
  for (std::size_t n = 1; n <= mu.size(); ++n) {
    const double current = ft_eval(t, dim, static_cast<double>(n));
    r.rhs += mu[n - 1] * (current - previous);
    previous = current;
  }
  return r;
}

}  // namespace breather
