#include "breather/wegner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "breather/rng.hpp"
#include "breather/ssf.hpp"
#include "detail/parallel.hpp"

namespace breather {

double delta_from_epsilon(double epsilon, const UcpConstants& constants) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  return 2.0 * std::pow(4.0 * epsilon / constants.kappa, constants.M);
}

double epsilon_max(const UcpConstants& constants, double omega_plus) {
  detail::require(omega_plus < 0.5, "omega_plus must be below 1/2");
  return 0.25 * constants.kappa * std::pow(0.5 * (0.5 - omega_plus), constants.M);
}

double wegner_constant(int dim, double b) {
  detail::require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  double factorial = 1.0;
  for (int i = 2; i <= dim + 1; ++i) factorial *= i;
  const double p32 = std::pow(32.0, dim);
  return 2.0 * p32 * (2.0 * std::exp(b) * factorial + std::pow(2.0, dim));
}

double wegner_rhs(double epsilon, int box_side, int dim, double b, const UcpConstants& constants,
                  double density_sup) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  detail::require(box_side >= 1, "box side must be positive");
  const double inv_m = 1.0 / constants.M;
  return wegner_constant(dim, b) * std::pow(4.0 / constants.kappa, inv_m) * density_sup *
         std::pow(epsilon, inv_m) * std::pow(std::abs(std::log(epsilon)), dim) * std::pow(box_side, dim);
}

void WegnerParams::validate() const {
  measure.validate();
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (energy + epsilon > b - 1.0) throw DomainError("energy window must lie below b - 1");
  if (constants && epsilon > epsilon_max(*constants, measure.omega_plus))
    throw DomainError("epsilon exceeds epsilon_max for the supplied constants");
  if (n_samples == 0) throw DomainError("n_samples must be positive");
}

WegnerReport wegner_expectation(const WegnerParams& params, std::size_t threads) {
  params.validate();
  const std::size_t n = params.n_samples;
  WegnerReport report;
  report.params = params;
  report.sample_index.resize(n);
  report.sample_seed.resize(n);
  report.counts.assign(n, -1);

  detail::parallel_for(n, threads, [&](std::size_t i) {
    const std::size_t s = i + 1;
    const std::uint64_t seed = derive_seed(params.master_seed, s);
    report.sample_index[i] = s;
    report.sample_seed[i] = seed;
    try {
      const OmegaSample omega = sample_omega(params.measure, params.grid.dim, params.grid.box_side, seed);
      const auto h = assemble_hamiltonian(params.grid, potential_on_grid(omega, params.shape, params.grid),
                                          params.magnetic);
      report.counts[i] = static_cast<long>(trace_spectral_projector(h, params.energy, params.epsilon));
    } catch (const NumericalError&) {
      report.counts[i] = -1;
    }
  });

  // Reduce in index order so the result is independent of scheduling.
  double sum = 0.0, sum_sq = 0.0;
  std::size_t used = 0;
  for (long c : report.counts) {
    if (c < 0) {
      ++report.excluded;
      continue;
    }
    sum += static_cast<double>(c);
    ++used;
  }
  if (used == 0 || static_cast<double>(report.excluded) > kMaxExcludedFraction * static_cast<double>(n))
    throw NumericalError("too many Monte Carlo samples failed: " + std::to_string(report.excluded) + " of " +
                         std::to_string(n));
  report.mean = sum / static_cast<double>(used);
  for (long c : report.counts)
    if (c >= 0) sum_sq += (static_cast<double>(c) - report.mean) * (static_cast<double>(c) - report.mean);
  report.stderr_mean = used > 1 ? std::sqrt(sum_sq / static_cast<double>(used - 1) / static_cast<double>(used)) : 0.0;
  if (params.constants)
    report.rhs_bound = wegner_rhs(params.epsilon, params.grid.box_side, params.grid.dim, params.b, *params.constants,
                                  params.measure.density_sup());
  return report;
}

SandwichResult sandwich_check(const Spectrum& spectrum, double energy, double epsilon) {
  detail::require(epsilon > 0.0, "epsilon must be positive");
  SandwichResult r;
  r.lhs = static_cast<double>(trace_spectral_projector(spectrum, energy, epsilon));
  r.rhs = trace_rho(spectrum, energy, epsilon, -2.0 * epsilon) - trace_rho(spectrum, energy, epsilon, 2.0 * epsilon);
  return r;
}

namespace {

double trace_rho_of(const OmegaSample& omega, double energy, double epsilon, double offset, const GridSpec& grid,
                    SingleSiteShape shape, const MagneticSpec& magnetic) {
  const auto h = assemble_hamiltonian(grid, potential_on_grid(omega, shape, grid), magnetic);
  return trace_rho(eigen_lowest(h, energy + offset + epsilon, false), energy, epsilon, offset);
}

}  // namespace

TraceMonotonicityResult trace_monotonicity_check(const OmegaSample& omega, double energy, double epsilon,
                                                 const UcpConstants& constants, const GridSpec& grid,
                                                 SingleSiteShape shape, const MagneticSpec& magnetic) {
  TraceMonotonicityResult r;
  r.delta = delta_from_epsilon(epsilon, constants);
  r.lhs = trace_rho_of(omega, energy, epsilon, -2.0 * epsilon, grid, shape, magnetic);
  r.rhs = trace_rho_of(shift_all(omega, r.delta), energy, epsilon, 2.0 * epsilon, grid, shape, magnetic);
  return r;
}

ThetaFunction::ThetaFunction(OmegaSample omega, double delta, std::size_t n, double energy, double epsilon,
                             GridSpec grid, SingleSiteShape shape, MagneticSpec magnetic)
    : base_(std::move(omega)),
      n_(n),
      energy_(energy),
      epsilon_(epsilon),
      grid_(grid),
      shape_(shape),
      magnetic_(magnetic) {
  detail::require(n >= 1 && n <= base_.site_count(), "site number out of range");
  detail::require(delta >= 0.0, "delta must be nonnegative");
  for (std::size_t k = 0; k + 1 < n; ++k) base_ = base_.with_value(k, base_.value(k) + delta);
}

OmegaSample ThetaFunction::configuration(double t) const { return base_.with_value(n_ - 1, t); }

double ThetaFunction::operator()(double t) const {
  return trace_rho_of(configuration(t), energy_, epsilon_, 2.0 * epsilon_, grid_, shape_, magnetic_);
}

double TelescopeState::max_defect() const { return std::max({chain_defect, endpoint_defect, sum_defect}); }

TelescopeState telescope(const OmegaSample& omega, double delta, double energy, double epsilon, double b,
                         const GridSpec& grid, SingleSiteShape shape, const MagneticSpec& magnetic) {
  detail::require(delta >= 0.0, "delta must be nonnegative");
  detail::require(omega.max_value() + delta <= 0.5, "shifted configuration leaves [0, 1/2]");
  detail::require(energy + 3.0 * epsilon <= b, "telescope needs the spectrum below b");
  TelescopeState st;
  st.sites = omega.site_count();
  st.theta_low.resize(st.sites);
  st.theta_high.resize(st.sites);
  for (std::size_t n = 1; n <= st.sites; ++n) {
    const ThetaFunction theta(omega, delta, n, energy, epsilon, grid, shape, magnetic);
    st.theta_low[n - 1] = theta(omega.value(n - 1));
    st.theta_high[n - 1] = theta(omega.value(n - 1) + delta);
  }
  st.trace_before = trace_rho_of(omega, energy, epsilon, 2.0 * epsilon, grid, shape, magnetic);
  st.trace_after = trace_rho_of(shift_all(omega, delta), energy, epsilon, 2.0 * epsilon, grid, shape, magnetic);

  for (std::size_t n = 1; n < st.sites; ++n)
    st.chain_defect = std::max(st.chain_defect, std::abs(st.theta_low[n] - st.theta_high[n - 1]));
  st.endpoint_defect = std::max(std::abs(st.theta_low.front() - st.trace_before),
                                std::abs(st.theta_high.back() - st.trace_after));
  double increments = 0.0;
  for (std::size_t n = 0; n < st.sites; ++n) increments += st.theta_high[n] - st.theta_low[n];
  st.sum_defect = std::abs((st.trace_after - st.trace_before) - increments);
  return st;
}

MonotoneTable::MonotoneTable(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  detail::require(nodes_.size() == values_.size() && nodes_.size() >= 2, "table needs at least two nodes");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    detail::require(nodes_[i] > nodes_[i - 1], "table nodes must increase strictly");
    const double drop = values_[i - 1] - values_[i];
    if (drop > 1e-9 * (1.0 + std::abs(values_[i - 1])))
      throw DomainError("table values must be nondecreasing");
    values_[i] = std::max(values_[i], values_[i - 1]);
  }
}

double MonotoneTable::operator()(double x) const {
  const double slack = 1e-12 * (1.0 + std::abs(x));
  if (x < nodes_.front() - slack || x > nodes_.back() + slack) throw DomainError("table evaluated outside its range");
  x = std::clamp(x, nodes_.front(), nodes_.back());
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  if (it == nodes_.end()) return values_.back();
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  const double u = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
  return values_[j - 1] + u * (values_[j] - values_[j - 1]);
}

MonotoneTable tabulate(const ThetaFunction& theta, std::span<const double> nodes) {
  std::vector<double> values;
  values.reserve(nodes.size());
  for (double t : nodes) values.push_back(theta(t));
  return MonotoneTable({nodes.begin(), nodes.end()}, std::move(values));
}

AveragingResult averaging_lemma_check(const MonotoneTable& theta, const MeasureSpec& measure, double delta) {
  measure.validate();
  detail::require(delta >= 0.0, "delta must be nonnegative");
  const double lo = measure.omega_minus, hi = measure.omega_plus;
  const double slack = 1e-12;
  detail::require(theta.front() <= lo + slack && theta.back() >= hi + delta - slack,
                  "table must cover [omega_-, omega_+ + delta]");

  // The integrand is piecewise polynomial with kinks at the nodes and the
  // nodes shifted by -delta; Gauss-Legendre on that partition is exact.
  std::vector<double> cuts{lo, hi};
  for (double t : theta.nodes())
    for (double c : {t, t - delta})
      if (c > lo && c < hi) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double x) {
    const double top = std::min(x + delta, theta.back());
    return (theta(top) - theta(std::max(x, theta.front()))) * measure.density_at(x);
  };
  AveragingResult r;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    r.lhs += boost::math::quadrature::gauss<double, 5>::integrate(integrand, cuts[i], cuts[i + 1]);
  r.rhs = measure.density_sup() * delta *
          (theta(std::min(hi + delta, theta.back())) - theta(std::max(lo, theta.front())));
  return r;
}

SpreadResult theta_spread_bound(double theta_low, double theta_high, double epsilon, int dim, double b) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("epsilon must lie in (0, 1/2]");
  SpreadResult r;
  r.spread = theta_high - theta_low;
  r.bound = (k1_constant(dim) * std::exp(b) + std::pow(2.0, dim) * k2_constant(dim)) *
            std::pow(std::abs(std::log(epsilon)), dim);
  r.holds = r.spread <= r.bound;
  return r;
}

std::vector<IdsRow> ids_estimate(const IdsRequest& request, std::size_t threads) {
  request.measure.validate();
  detail::require(!request.box_sides.empty() && !request.energies.empty(), "IDS needs box sides and energies");
  detail::require(request.n_samples >= 1, "n_samples must be positive");
  for (int l : request.box_sides) detail::require(l >= 1 && l % 2 == 1, "box sides must be odd");

  const std::size_t nl = request.box_sides.size(), ns = request.n_samples, ne = request.energies.size();
  std::vector<std::size_t> counts(nl * ns * ne);
  detail::parallel_for(nl * ns, threads, [&](std::size_t job) {
    const std::size_t li = job / ns, s = job % ns;
    const int side = request.box_sides[li];
    const GridSpec grid = build_grid(request.dim, side, request.mesh_per_unit);
    const OmegaSample omega = sample_omega(request.measure, request.dim, side, derive_seed(request.master_seed, s + 1));
    const auto h = assemble_hamiltonian(grid, potential_on_grid(omega, request.shape, grid), request.magnetic);
    for (std::size_t e = 0; e < ne; ++e)
      counts[(li * ns + s) * ne + e] = request.energies[e] < 0.0 ? 0 : count_below(h, request.energies[e]);
  });

  std::vector<IdsRow> rows;
  for (std::size_t li = 0; li < nl; ++li) {
    const double volume = std::pow(request.box_sides[li], request.dim);
    for (std::size_t e = 0; e < ne; ++e) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t s = 0; s < ns; ++s) sum += static_cast<double>(counts[(li * ns + s) * ne + e]);
      const double mean = sum / static_cast<double>(ns);
      for (std::size_t s = 0; s < ns; ++s) {
        const double dev = static_cast<double>(counts[(li * ns + s) * ne + e]) - mean;
        sum_sq += dev * dev;
      }
      const double se = ns > 1 ? std::sqrt(sum_sq / static_cast<double>(ns - 1) / static_cast<double>(ns)) : 0.0;
      rows.push_back({request.box_sides[li], request.energies[e], mean / volume, se / volume});
    }
  }
  return rows;
}

HoelderFit hoelder_fit(std::span<const IdsRow> rows, double e0, std::span<const double> epsilons) {
  detail::require(epsilons.size() >= 2, "Hoelder fit needs at least two epsilons");
  auto lookup = [&](double energy) {
    for (const auto& r : rows)
      if (std::abs(r.energy - energy) <= 1e-12 * (1.0 + std::abs(energy))) return r.ids;
    throw DomainError("energy " + std::to_string(energy) + " missing from the IDS table");
  };
  HoelderFit fit;
  for (double eps : epsilons) {
    detail::require(eps > 0.0, "epsilons must be positive");
    fit.epsilons.push_back(eps);
    fit.increments.push_back(lookup(e0 + eps) - lookup(e0 - eps));
  }
  if (std::any_of(fit.increments.begin(), fit.increments.end(), [](double d) { return d <= 0.0; })) {
    fit.below_resolution = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(epsilons.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fit.epsilons.size(); ++i) {
    const double x = std::log(fit.epsilons[i]), y = std::log(fit.increments[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

}  // namespace breather
