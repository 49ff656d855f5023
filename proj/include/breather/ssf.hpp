#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "breather/eigensolve.hpp"
#include "breather/grid.hpp"

namespace breather {

/// Integer-valued, right-continuous step function: zero before the first
/// breakpoint, values[k] on [breakpoints[k], breakpoints[k+1]).
/// Queries above `cutoff` are rejected.
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<long> values;
  double cutoff = 0.0;

  long operator()(double x) const;
  long max_abs() const;
  long min_value() const;
};

/// Singular values in nonincreasing order.
struct SingularValueList {
  std::vector<double> values;
};

/// Finite-volume spectral shift function xi = N_0 - N_1 with
/// N_j(x) = #{eigenvalues of H_j <= x}, defined below the common cutoff.
StepFunction spectral_shift(const Spectrum& spec0, const Spectrum& spec1);

/// Smooth test function whose derivative vanishes above `support_upper`.
/// `knots` lists points where the derivative is not smooth; quadrature
/// splits there.
struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double support_upper = 0.0;
  std::vector<double> knots;
};

/// Test function g(x) = rho(x - shift) built from the cubic switch.
TestFunction smooth_switch_test_function(double epsilon, double shift);

struct KreinResult {
  double lhs = 0.0;  // Tr[g(H1) - g(H0)]
  double rhs = 0.0;  // integral of xi g'
  double gap = 0.0;
};

KreinResult krein_check(const Spectrum& spec0, const Spectrum& spec1, const TestFunction& g);
KreinResult krein_check(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, const TestFunction& g);

struct InvarianceResult {
  long lhs = 0;  // xi(lambda; H1, H0)
  long rhs = 0;  // -xi(exp(-lambda); exp(-H1), exp(-H0))
};

/// Empty when lambda lies within 1e-12 (1 + |lambda|) of an eigenvalue.
std::optional<InvarianceResult> invariance_check(const Spectrum& spec0, const Spectrum& spec1, double lambda);

/// Singular values of exp(-t H1) - exp(-t H0).
SingularValueList veff_singular_values(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, double t = 1.0);

/// ((2d)^{1/4} + 1) exp(-n^{1/d} / 16), asserted only for n > 4^d.
double singular_bound(std::size_t n, int dim);

/// F_t(x) = integral_0^x (exp(t y^{1/d}) - 1) dy.
double ft_eval(double t, int dim, double x);
/// F_t'(x) = exp(t x^{1/d}) - 1.
double ft_derivative(double t, int dim, double x);

/// Legendre transform G_t(y) = sup_{x >= 0} (x y - F_t(x)).
struct LegendreValue {
  double value = 0.0;
  double argmax = 0.0;
  double search_limit = 0.0;  // F_t' exceeds y beyond this point
};
LegendreValue legendre_gt(double t, int dim, double y);

/// integral_{-inf}^{upper} F_t(|xi(lambda)|) d lambda, summed piecewise.
double ssf_ft_integral(const StepFunction& xi, double upper, double t, int dim);

/// 2 * 32^d * (d + 1)!
double k1_constant(int dim);
/// 32^d
double k2_constant(int dim);

/// K1 e^b + K2 (ln(1 + sup|g'|))^d ||g'||_1
double trace_diff_bound(double b, double sup_gprime, double l1_gprime, int dim);

/// (2 pi d / e) (n / volume)^{2/d}
double weyl_lower_bound(std::size_t n, double volume, int dim);

/// volume (e E / (2 pi d))^{d/2}, an upper bound on the Dirichlet counting
/// function of a region of that volume.
double counting_bound(double energy, double volume, int dim);

struct MajorizationResult {
  double lhs = 0.0;  // integral of F_t(|xi(s; e^{-H1}, e^{-H0})|) ds
  double rhs = 0.0;  // sum_n mu_n (F_t(n) - F_t(n - 1))
};

/// Compares both sides for a pair small enough for full diagonalization.
MajorizationResult hs_majorization(const HamiltonianMatrix& h0, const HamiltonianMatrix& h1, double t, int dim);

}  // namespace breather
