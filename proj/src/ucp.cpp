#include "breather/ucp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

namespace breather {

double UcpConstants::lower_bound(double radius) const {
  if (radius <= 0.0) return 0.0;
  return kappa * std::pow(radius, 1.0 / M);
}

nlohmann::json to_json(const UcpConstants& c) {
  return {{"kappa", c.kappa}, {"M", c.M}, {"fit_window", c.fit_window}, {"residual", c.residual}, {"b", c.b}};
}

UcpConstants ucp_constants_from_json(const nlohmann::json& j) {
  UcpConstants c;
  c.kappa = j.at("kappa").get<double>();
  c.M = j.at("M").get<double>();
  c.fit_window = j.value("fit_window", std::vector<double>{});
  c.residual = j.value("residual", 0.0);
  c.b = j.value("b", 0.0);
  detail::require(c.kappa > 0.0 && c.kappa <= 1.0, "kappa must lie in (0, 1]");
  detail::require(c.M >= 1.0, "M must be at least 1");
  return c;
}

std::optional<double> ucp_constant(const Spectrum& s, const GridSpec& grid, std::span<const double> w) {
  detail::require(s.has_vectors() || s.eigenvalues.empty(), "unique-continuation constant needs eigenvectors");
  detail::require(w.size() == s.dimension, "weight length does not match the matrix size");
  for (double x : w) detail::require(x == 0.0 || x == 1.0, "weights must be 0 or 1");
  if (s.eigenvalues.empty()) return std::nullopt;

  // Continuum-normalized eigenfunctions: q = Q / h^{d/2}.
  const double hd = grid.cell_volume();
  const Eigen::MatrixXcd q = s.eigenvectors / std::sqrt(hd);
  const Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())) * hd;
  Eigen::MatrixXcd gram = q.adjoint() * weights.asDiagonal() * q;
  gram = 0.5 * (gram + gram.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::optional<double> ucp_constant(const HamiltonianMatrix& h, double b, std::span<const double> w) {
  return ucp_constant(eigen_lowest(h, b, true), h.grid(), w);
}

std::optional<UcpSample> lifting_ucp_sample(const OmegaSample& omega, double delta, double b, const GridSpec& grid,
                                            SingleSiteShape shape, const MagneticSpec& magnetic) {
  const OmegaSample shifted = shift_all(omega, delta);
  const auto w = w_indicator(increment_centers(omega, delta), grid);
  const auto h = assemble_hamiltonian(grid, potential_on_grid(shifted, shape, grid), magnetic);
  const auto c = ucp_constant(h, b, w);
  if (!c) return std::nullopt;
  return UcpSample{0.5 * delta, *c};
}

UcpConstants fit_ucp_exponents(std::span<const UcpSample> samples, double b) {
  std::map<double, double> minima;
  for (const auto& s : samples) {
    detail::require(s.radius > 0.0, "sample radii must be positive");
    detail::require(s.constant > 0.0, "unique-continuation constants must be positive to fit");
    auto [it, inserted] = minima.emplace(s.radius, s.constant);
    if (!inserted) it->second = std::min(it->second, s.constant);
  }
  detail::require(minima.size() >= 3, "fit needs at least 3 distinct radii");

  // Ordinary least squares in log-log coordinates.
  const double n = static_cast<double>(minima.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [r, c] : minima) {
    const double x = std::log(r), y = std::log(c);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double residual = 0.0;
  for (const auto& [r, c] : minima) {
    const double e = std::log(c) - (intercept + slope * std::log(r));
    residual += e * e;
  }

  UcpConstants out;
  out.b = b;
  out.residual = std::sqrt(residual / n);
  out.M = std::clamp(slope > 0.0 ? 1.0 / slope : kMaxUcpExponent, 1.0, kMaxUcpExponent);
  double kappa = std::min(1.0, std::exp(intercept));
  for (const auto& s : samples) kappa = std::min(kappa, s.constant / std::pow(s.radius, 1.0 / out.M));
  out.kappa = kappa;
  for (const auto& [r, c] : minima) out.fit_window.push_back(r);
  return out;
}

std::size_t LiftingReport::nonnegative_lifting() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const LiftingEntry& e) { return e.lifting_margin >= 0.0; }));
}

double LiftingReport::min_monotonicity_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) m = std::min(m, e.monotonicity_margin);
  return m;
}

LiftingReport lifting_check(const OmegaSample& omega, double delta, const UcpConstants& constants, double b,
                            const GridSpec& grid, SingleSiteShape shape, const MagneticSpec& magnetic) {
  detail::require(delta >= 0.0, "delta must be nonnegative");
  const OmegaSample shifted = shift_all(omega, delta);
  const auto before = eigen_lowest(assemble_hamiltonian(grid, potential_on_grid(omega, shape, grid), magnetic),
                                   b - 1.0, false);
  // 0 <= V_{omega+delta} - V_omega <= 1 bounds every lift by one.
  const auto after = eigen_lowest(assemble_hamiltonian(grid, potential_on_grid(shifted, shape, grid), magnetic),
                                  b, false);
  LiftingReport report;
  report.delta = delta;
  report.lift = constants.lower_bound(0.5 * delta);
  for (std::size_t i = 0; i < before.eigenvalues.size(); ++i) {
    if (i >= after.eigenvalues.size())
      throw NumericalError("lifted eigenvalue " + std::to_string(i) + " exceeds b; potential increment above 1?");
    LiftingEntry e;
    e.index = i;
    e.lambda_before = before.eigenvalues[i];
    e.lambda_after = after.eigenvalues[i];
    e.monotonicity_margin = e.lambda_after - e.lambda_before;
    e.lifting_margin = e.monotonicity_margin - report.lift;
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace breather
