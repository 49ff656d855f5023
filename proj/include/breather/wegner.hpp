#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "breather/eigensolve.hpp"
#include "breather/field.hpp"
#include "breather/grid.hpp"
#include "breather/ucp.hpp"

namespace breather {

/// delta(eps) = 2 (4 eps / kappa)^M
double delta_from_epsilon(double epsilon, const UcpConstants& constants);

/// (kappa / 4) ((1/2 - omega_plus) / 2)^M
double epsilon_max(const UcpConstants& constants, double omega_plus);

/// 2 * 32^d (2 e^b (d + 1)! + 2^d)
double wegner_constant(int dim, double b);

/// C (4 / kappa)^{1/M} ||nu||_inf eps^{1/M} |ln eps|^d L^d for 0 < eps < 1.
/// The eps <= epsilon_max requirement is enforced by WegnerParams.
double wegner_rhs(double epsilon, int box_side, int dim, double b, const UcpConstants& constants,
                  double density_sup);

struct WegnerParams {
  double b = 0.0;
  double energy = 0.0;
  double epsilon = 0.0;
  /// Without constants no right-hand side is attached.
  std::optional<UcpConstants> constants;
  MeasureSpec measure;
  SingleSiteShape shape = SingleSiteShape::ball;
  GridSpec grid;
  MagneticSpec magnetic;
  std::size_t n_samples = 0;
  std::uint64_t master_seed = 0;

  /// [E - eps, E + eps] inside (-inf, b - 1]; eps <= epsilon_max when
  /// constants are present.
  void validate() const;
};

struct WegnerReport {
  WegnerParams params;
  std::vector<std::size_t> sample_index;  // 1-based
  std::vector<std::uint64_t> sample_seed;
  std::vector<long> counts;               // -1 marks an excluded sample
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::optional<double> rhs_bound;
  std::size_t excluded = 0;
};

/// Largest excluded fraction tolerated before the estimate is rejected.
inline constexpr double kMaxExcludedFraction = 0.01;

/// Monte Carlo estimate of E[Tr chi_[E-eps, E+eps](H_omega)] by inertia
/// counting. Sample s uses derive_seed(master_seed, s); results do not depend
/// on `threads`.
WegnerReport wegner_expectation(const WegnerParams& params, std::size_t threads = 1);

struct SandwichResult {
  double lhs = 0.0;  // Tr chi_[E-eps, E+eps]
  double rhs = 0.0;  // Tr[rho(H - E + 2 eps) - rho(H - E - 2 eps)]
};
SandwichResult sandwich_check(const Spectrum& spectrum, double energy, double epsilon);

/// Tr rho(H_omega - E + 2 eps) against Tr rho(H_{omega + delta} - E - 2 eps),
/// delta = delta_from_epsilon(eps).
struct TraceMonotonicityResult {
  double delta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};
TraceMonotonicityResult trace_monotonicity_check(const OmegaSample& omega, double energy, double epsilon,
                                                 const UcpConstants& constants, const GridSpec& grid,
                                                 SingleSiteShape shape, const MagneticSpec& magnetic);

/// Theta_n(t) = Tr rho(H(omega_n(t)) - E - 2 eps), where omega_n(t) has the
/// first n - 1 sites (lexicographic) raised by delta, site n set to t and the
/// rest unchanged.
class ThetaFunction {
 public:
  ThetaFunction(OmegaSample omega, double delta, std::size_t n, double energy, double epsilon, GridSpec grid,
                SingleSiteShape shape, MagneticSpec magnetic);

  std::size_t index() const { return n_; }
  OmegaSample configuration(double t) const;
  double operator()(double t) const;

 private:
  OmegaSample base_;
  std::size_t n_;
  double energy_, epsilon_;
  GridSpec grid_;
  SingleSiteShape shape_;
  MagneticSpec magnetic_;
};

struct TelescopeState {
  std::size_t sites = 0;
  std::vector<double> theta_low;   // Theta_n(omega_k(n))
  std::vector<double> theta_high;  // Theta_n(omega_k(n) + delta)
  double trace_before = 0.0;       // Tr rho(H_omega - E - 2 eps)
  double trace_after = 0.0;        // Tr rho(H_{omega+delta} - E - 2 eps)
  double chain_defect = 0.0;
  double endpoint_defect = 0.0;
  double sum_defect = 0.0;

  double max_defect() const;
};

TelescopeState telescope(const OmegaSample& omega, double delta, double energy, double epsilon, double b,
                         const GridSpec& grid, SingleSiteShape shape, const MagneticSpec& magnetic);

/// Nondecreasing function sampled on an increasing grid, linearly interpolated.
class MonotoneTable {
 public:
  /// Rejects decreases larger than 1e-9 (1 + |value|); smaller ones are
  /// rounding noise and are flattened.
  MonotoneTable(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

MonotoneTable tabulate(const ThetaFunction& theta, std::span<const double> nodes);

struct AveragingResult {
  double lhs = 0.0;  // integral of [Theta(l + delta) - Theta(l)] d mu(l)
  double rhs = 0.0;  // ||nu||_inf delta [Theta(omega_+ + delta) - Theta(omega_-)]
};
AveragingResult averaging_lemma_check(const MonotoneTable& theta, const MeasureSpec& measure, double delta);

struct SpreadResult {
  double spread = 0.0;
  double bound = 0.0;  // (K1 e^b + 2^d K2) |ln eps|^d
  bool holds = false;
};
SpreadResult theta_spread_bound(double theta_low, double theta_high, double epsilon, int dim, double b);

struct IdsRow {
  int box_side = 0;
  double energy = 0.0;
  double ids = 0.0;  // mean count / L^d
  double stderr_ids = 0.0;
};

struct IdsRequest {
  std::vector<int> box_sides;
  std::vector<double> energies;
  MeasureSpec measure;
  SingleSiteShape shape = SingleSiteShape::ball;
  int dim = 1;
  int mesh_per_unit = 16;
  MagneticSpec magnetic;
  std::size_t n_samples = 0;
  std::uint64_t master_seed = 0;
};

/// Empirical N_L(E) = E[#{lambda <= E}] / L^d. Sample s draws from
/// derive_seed(master_seed, s) for every L.
std::vector<IdsRow> ids_estimate(const IdsRequest& request, std::size_t threads = 1);

struct HoelderFit {
  bool below_resolution = false;
  double slope = 0.0;
  std::vector<double> epsilons;
  std::vector<double> increments;  // N(E0 + eps) - N(E0 - eps)
};

/// Regresses log(N(E0 + eps) - N(E0 - eps)) on log eps using the rows of a
/// single box side. Every E0 +- eps must be present among the rows.
HoelderFit hoelder_fit(std::span<const IdsRow> rows, double e0, std::span<const double> epsilons);

}  // namespace breather
