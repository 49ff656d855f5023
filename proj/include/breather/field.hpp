#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "breather/grid.hpp"

namespace breather {

enum class DensityKind { uniform, truncated_linear };

/// Single-site distribution mu on [omega_minus, omega_plus].
///
/// truncated_linear has density 1/w + slope*(x - mid) on the support
/// (w the width, mid the midpoint); it integrates to one for any slope and
/// stays nonnegative for |slope| <= 2/w^2.
struct MeasureSpec {
  double omega_minus = 0.0;
  double omega_plus = 0.25;
  DensityKind density = DensityKind::uniform;
  double slope = 0.0;

  void validate() const;
  double width() const { return omega_plus - omega_minus; }
  double density_at(double x) const;
  double density_sup() const;
  double inverse_cdf(double u) const;
  double mean() const;

  bool operator==(const MeasureSpec&) const = default;
};

enum class SingleSiteShape { ball, cube };

using Site = std::array<int, 3>;

/// Radii omega_j for the lattice sites of the box, L^d of them, enumerated
/// lexicographically over coordinates -(L-1)/2 .. (L-1)/2.
class OmegaSample {
 public:
  OmegaSample(int dim, int box_side, std::vector<double> values);

  int dim() const { return dim_; }
  int box_side() const { return box_side_; }
  std::size_t site_count() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double value(std::size_t site_index) const { return values_.at(site_index); }
  double max_value() const;

  Site site(std::size_t site_index) const;
  /// Throws DomainError for sites outside the box.
  std::size_t site_index(const Site& site) const;
  bool contains(const Site& site) const;

  /// Copy with one site value replaced.
  OmegaSample with_value(std::size_t site_index, double value) const;

  bool operator==(const OmegaSample&) const = default;

 private:
  int dim_;
  int box_side_;
  std::vector<double> values_;
};

/// i.i.d. draw from mu by inverse CDF; site k uses the stream derive_seed(seed, k).
OmegaSample sample_omega(const MeasureSpec& measure, int dim, int box_side, std::uint64_t seed);

/// Sum over sites of the indicator of the open ball B_{omega_j}(j) or the open
/// cube Lambda_{2 omega_j}(j), evaluated at x.
int potential_sum(const OmegaSample& omega, SingleSiteShape shape, const Point& x);
/// Same as potential_sum; x must lie in the closed box.
double evaluate_potential(const OmegaSample& omega, SingleSiteShape shape, const Point& x);
std::vector<double> potential_on_grid(const OmegaSample& omega, SingleSiteShape shape, const GridSpec& grid);

OmegaSample shift_all(const OmegaSample& omega, double delta);
OmegaSample shift_one(const OmegaSample& omega, const Site& site, double delta);

/// Balls B_radius(x_j), one per lattice cell, with B_radius(x_j) inside Lambda_1(j).
struct EquidistributedCenters {
  int dim = 1;
  double radius = 0.0;
  std::vector<Point> centers;
};

/// x_j = j + (omega_j + delta/2) e_1 with radius delta/2: a ball inside the
/// increment region of site j when omega_j grows by delta.
EquidistributedCenters increment_centers(const OmegaSample& omega, double delta);

/// Indicator of the union of the open balls sampled at the grid points.
/// Points numerically on a sphere (relative 1e-12) count as outside.
std::vector<double> w_indicator(const EquidistributedCenters& centers, const GridSpec& grid);

/// JSON form {"L": int, "dim": int, "sites": [[[j...], value], ...]}.
nlohmann::json to_json(const OmegaSample& omega);
OmegaSample omega_from_json(const nlohmann::json& j);

}  // namespace breather
