#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "breather/eigensolve.hpp"
#include "breather/field.hpp"
#include "breather/grid.hpp"

namespace breather {

/// Constants (kappa, M) of the unique-continuation lower bound
/// chi W chi >= kappa r^{1/M} chi, where r is the radius of the balls in W.
struct UcpConstants {
  double kappa = 1.0;
  double M = 1.0;
  std::vector<double> fit_window;  // radii used in the fit
  double residual = 0.0;           // RMS of the log-log regression
  double b = 0.0;

  /// kappa * r^{1/M}
  double lower_bound(double radius) const;
};

nlohmann::json to_json(const UcpConstants& c);
UcpConstants ucp_constants_from_json(const nlohmann::json& j);

/// Smallest eigenvalue of G_mn = sum_x q_m(x) conj(q_n(x)) w(x) h^d over the
/// eigenvectors with lambda <= b, normalized so sum_x |q|^2 h^d = 1. Empty
/// when no eigenvalue lies below b.
std::optional<double> ucp_constant(const HamiltonianMatrix& h, double b, std::span<const double> w);
std::optional<double> ucp_constant(const Spectrum& s, const GridSpec& grid, std::span<const double> w);

/// One observation of the unique-continuation constant for balls of `radius`.
struct UcpSample {
  double radius = 0.0;
  double constant = 0.0;
};

/// The observation relevant to eigenvalue lifting: the constant of
/// H(omega + delta) below b against W_{delta/2} built from increment_centers.
std::optional<UcpSample> lifting_ucp_sample(const OmegaSample& omega, double delta, double b, const GridSpec& grid,
                                            SingleSiteShape shape, const MagneticSpec& magnetic);

/// Least-squares fit log c = log kappa + (1/M) log r on the per-radius minima,
/// then clamped to M >= 1, kappa <= 1 and shrunk so that every input sample
/// satisfies c >= kappa r^{1/M}.
UcpConstants fit_ucp_exponents(std::span<const UcpSample> samples, double b);

/// Largest M accepted by the fit; flat or decreasing data clamp here.
inline constexpr double kMaxUcpExponent = 1e3;

struct LiftingEntry {
  std::size_t index = 0;
  double lambda_before = 0.0;
  double lambda_after = 0.0;
  double lifting_margin = 0.0;       // lambda_after - lambda_before - kappa (delta/2)^{1/M}
  double monotonicity_margin = 0.0;  // lambda_after - lambda_before
};

struct LiftingReport {
  double delta = 0.0;
  double lift = 0.0;  // kappa (delta/2)^{1/M}
  std::vector<LiftingEntry> entries;

  std::size_t nonnegative_lifting() const;
  double min_monotonicity_margin() const;
};

/// Compares spectra of H(omega) and H(omega + delta) for every eigenvalue
/// lambda_i(omega) <= b - 1.
LiftingReport lifting_check(const OmegaSample& omega, double delta, const UcpConstants& constants, double b,
                            const GridSpec& grid, SingleSiteShape shape, const MagneticSpec& magnetic);

}  // namespace breather
