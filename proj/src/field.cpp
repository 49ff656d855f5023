#include "breather/field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "breather/error.hpp"
#include "breather/rng.hpp"

namespace breather {

void MeasureSpec::validate() const {
  detail::require(std::isfinite(omega_minus) && std::isfinite(omega_plus), "omega bounds must be finite");
  detail::require(omega_minus >= 0.0, "omega_minus must satisfy 0 <= omega_minus");
  detail::require(omega_minus < omega_plus, "omega_minus < omega_plus required");
  detail::require(omega_plus < 0.5, "omega_plus < 1/2 required");
  if (density == DensityKind::truncated_linear) {
    const double w = width();
    detail::require(std::abs(slope) <= 2.0 / (w * w),
                    "truncated_linear slope must satisfy |slope| <= 2/w^2 for a nonnegative density");
  }
}

double MeasureSpec::density_at(double x) const {
  if (x < omega_minus || x > omega_plus) return 0.0;
  const double w = width();
  if (density == DensityKind::uniform) return 1.0 / w;
  const double mid = 0.5 * (omega_minus + omega_plus);
  return 1.0 / w + slope * (x - mid);
}

double MeasureSpec::density_sup() const {
  const double w = width();
  if (density == DensityKind::uniform) return 1.0 / w;
  return 1.0 / w + std::abs(slope) * 0.5 * w;
}

double MeasureSpec::inverse_cdf(double u) const {
  const double w = width();
  const double mid = 0.5 * (omega_minus + omega_plus);
  double y = 0.0;  // offset from the midpoint
  if (density == DensityKind::uniform || slope == 0.0) {
    y = w * (u - 0.5);
  } else {
    // CDF(mid + y) = (y + w/2)/w + slope/2 (y^2 - w^2/4); solve with the
    // cancellation-free root.
    const double a = 0.5 * slope;
    const double b = 1.0 / w;
    const double c = 0.5 - slope * w * w / 8.0 - u;
    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    y = -2.0 * c / (b + std::sqrt(disc));
  }
  return std::clamp(mid + y, omega_minus, omega_plus);
}

double MeasureSpec::mean() const {
  const double w = width();
  const double mid = 0.5 * (omega_minus + omega_plus);
  if (density == DensityKind::uniform) return mid;
  return mid + slope * w * w * w / 12.0;
}

// ---------------------------------------------------------------------------

OmegaSample::OmegaSample(int dim, int box_side, std::vector<double> values)
    : dim_(dim), box_side_(box_side), values_(std::move(values)) {
  detail::require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  detail::require(box_side >= 1 && box_side % 2 == 1, "box side L must be a positive odd integer");
  std::size_t expected = 1;
  for (int a = 0; a < dim; ++a) expected *= static_cast<std::size_t>(box_side);
  detail::require(values_.size() == expected,
                  "omega sample needs L^d = " + std::to_string(expected) + " values");
  for (double v : values_)
    detail::require(std::isfinite(v) && v >= 0.0 && v <= 0.5, "omega values must lie in [0, 1/2]");
}

double OmegaSample::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

Site OmegaSample::site(std::size_t site_index) const {
  const int half = (box_side_ - 1) / 2;
  Site s{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    s[a] = static_cast<int>(site_index % static_cast<std::size_t>(box_side_)) - half;
    site_index /= static_cast<std::size_t>(box_side_);
  }
  return s;
}

bool OmegaSample::contains(const Site& site) const {
  const int half = (box_side_ - 1) / 2;
  for (int a = 0; a < dim_; ++a)
    if (site[a] < -half || site[a] > half) return false;
  return true;
}

std::size_t OmegaSample::site_index(const Site& site) const {
  detail::require(contains(site), "site lies outside the box");
  const int half = (box_side_ - 1) / 2;
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a)
    idx = idx * static_cast<std::size_t>(box_side_) + static_cast<std::size_t>(site[a] + half);
  return idx;
}

OmegaSample OmegaSample::with_value(std::size_t site_index, double value) const {
  auto values = values_;
  values.at(site_index) = value;
  return {dim_, box_side_, std::move(values)};
}

OmegaSample sample_omega(const MeasureSpec& measure, int dim, int box_side, std::uint64_t seed) {
  measure.validate();
  detail::require(box_side >= 1 && box_side % 2 == 1, "box side L must be a positive odd integer");
  std::size_t count = 1;
  for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(box_side);
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::mt19937_64 engine(derive_seed(seed, k));
    values[k] = measure.inverse_cdf(uniform01(engine));
  }
  return {dim, box_side, std::move(values)};
}

// ---------------------------------------------------------------------------

namespace {

bool inside_displacement(SingleSiteShape shape, int dim, const Point& d, double radius) {
  if (shape == SingleSiteShape::ball) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += d[a] * d[a];
    return r2 < radius * radius;
  }
  for (int a = 0; a < dim; ++a)
    if (!(std::abs(d[a]) < radius)) return false;
  return true;
}

bool inside_single_site(SingleSiteShape shape, int dim, const Point& x, const Site& j, double radius) {
  Point d{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) d[a] = x[a] - j[a];
  return inside_displacement(shape, dim, d, radius);
}

}  // namespace

int potential_sum(const OmegaSample& omega, SingleSiteShape shape, const Point& x) {
  // Supports have radius <= 1/2, so only the lattice points adjacent to x matter.
  const int dim = omega.dim();
  std::array<int, 3> base{0, 0, 0};
  for (int a = 0; a < dim; ++a) base[a] = static_cast<int>(std::floor(x[a]));
  int total = 0;
  const int corners = 1 << dim;
  for (int mask = 0; mask < corners; ++mask) {
    Site j{0, 0, 0};
    for (int a = 0; a < dim; ++a) j[a] = base[a] + ((mask >> a) & 1);
    if (!omega.contains(j)) continue;
    if (inside_single_site(shape, dim, x, j, omega.value(omega.site_index(j)))) ++total;
  }
  return total;
}

double evaluate_potential(const OmegaSample& omega, SingleSiteShape shape, const Point& x) {
  const double half = 0.5 * omega.box_side();
  for (int a = 0; a < omega.dim(); ++a)
    detail::require(x[a] >= -half && x[a] <= half, "evaluation point lies outside the closed box");
  return static_cast<double>(potential_sum(omega, shape, x));
}

std::vector<double> potential_on_grid(const OmegaSample& omega, SingleSiteShape shape, const GridSpec& grid) {
  detail::require(omega.dim() == grid.dim && omega.box_side() == grid.box_side,
                  "omega sample and grid disagree on dimension or box side");
  // Displacements from sites are formed from integer indices so that points
  // on a support boundary are classified the same way for every radius.
  const int dim = grid.dim, n_h = grid.mesh_per_unit, side = grid.box_side;
  std::vector<double> v(grid.dof(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto idx = grid.axis_indices(i);
    std::array<int, 3> base{0, 0, 0};
    for (int a = 0; a < dim; ++a) base[a] = static_cast<int>(std::floor(grid.coordinate(idx[a])));
    for (int mask = 0; mask < (1 << dim); ++mask) {
      Site j{0, 0, 0};
      Point d{0.0, 0.0, 0.0};
      for (int a = 0; a < dim; ++a) {
        j[a] = base[a] + ((mask >> a) & 1);
        d[a] = static_cast<double>(2 * idx[a] - (side + 2 * j[a]) * n_h) / (2.0 * n_h);
      }
      if (omega.contains(j) && inside_displacement(shape, dim, d, omega.value(omega.site_index(j)))) v[i] += 1.0;
    }
  }
  return v;
}

OmegaSample shift_all(const OmegaSample& omega, double delta) {
  detail::require(delta >= 0.0, "shift delta must be nonnegative");
  std::vector<double> values(omega.values().begin(), omega.values().end());
  for (double& v : values) {
    v += delta;
    detail::require(v <= 0.5, "shifted omega value exceeds 1/2");
  }
  return {omega.dim(), omega.box_side(), std::move(values)};
}

OmegaSample shift_one(const OmegaSample& omega, const Site& site, double delta) {
  detail::require(delta >= 0.0, "shift delta must be nonnegative");
  const std::size_t idx = omega.site_index(site);
  const double v = omega.value(idx) + delta;
  detail::require(v <= 0.5, "shifted omega value exceeds 1/2");
  return omega.with_value(idx, v);
}

EquidistributedCenters increment_centers(const OmegaSample& omega, double delta) {
  detail::require(delta > 0.0, "increment delta must be positive");
  detail::require(omega.max_value() + delta <= 0.5, "shifted omega value exceeds 1/2");
  EquidistributedCenters out;
  out.dim = omega.dim();
  out.radius = 0.5 * delta;
  out.centers.reserve(omega.site_count());
  for (std::size_t k = 0; k < omega.site_count(); ++k) {
    const Site j = omega.site(k);
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < omega.dim(); ++a) x[a] = j[a];
    x[0] += omega.value(k) + 0.5 * delta;
    out.centers.push_back(x);
  }
  return out;
}

// Points within relative 1e-12 of a sphere are treated as boundary points of
// the open ball.
constexpr double kBallShrink = 1.0 - 1e-12;

std::vector<double> w_indicator(const EquidistributedCenters& centers, const GridSpec& grid) {
  detail::require(centers.dim == grid.dim, "centers and grid disagree on dimension");
  std::vector<double> w(grid.dof(), 0.0);
  const double h = grid.spacing();
  const double r = centers.radius;
  const int n = grid.points_per_axis();
  const double origin = -0.5 * grid.box_side;
  for (const Point& c : centers.centers) {
    std::array<int, 3> lo{1, 1, 1}, hi{1, 1, 1};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = std::max(1, static_cast<int>(std::floor((c[a] - r - origin) / h)));
      hi[a] = std::min(n, static_cast<int>(std::ceil((c[a] + r - origin) / h)));
    }
    for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
      for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
        for (int i2 = lo[2]; i2 <= hi[2]; ++i2) {
          const std::size_t flat = grid.flat_index({i0, i1, i2});
          const Point p = grid.point(flat);
          double d2 = 0.0;
          for (int a = 0; a < grid.dim; ++a) d2 += (p[a] - c[a]) * (p[a] - c[a]);
          if (d2 < r * r * kBallShrink) w[flat] = 1.0;
        }
  }
  return w;
}

nlohmann::json to_json(const OmegaSample& omega) {
  nlohmann::json sites = nlohmann::json::array();
  for (std::size_t k = 0; k < omega.site_count(); ++k) {
    const Site s = omega.site(k);
    nlohmann::json coords = nlohmann::json::array();
    for (int a = 0; a < omega.dim(); ++a) coords.push_back(s[a]);
    sites.push_back(nlohmann::json::array({coords, omega.value(k)}));
  }
  return {{"L", omega.box_side()}, {"dim", omega.dim()}, {"sites", sites}};
}

OmegaSample omega_from_json(const nlohmann::json& j) {
  const int L = j.at("L").get<int>();
  const int dim = j.at("dim").get<int>();
  std::size_t count = 1;
  for (int a = 0; a < dim; ++a) count *= static_cast<std::size_t>(L);
  std::vector<double> values(count, 0.0);
  std::vector<bool> seen(count, false);
  OmegaSample probe(dim, L, values);
  for (const auto& entry : j.at("sites")) {
    Site s{0, 0, 0};
    const auto& coords = entry.at(0);
    detail::require(static_cast<int>(coords.size()) == dim, "site coordinate arity does not match dim");
    for (int a = 0; a < dim; ++a) s[a] = coords.at(static_cast<std::size_t>(a)).get<int>();
    const std::size_t idx = probe.site_index(s);
    values[idx] = entry.at(1).get<double>();
    seen[idx] = true;
  }
  detail::require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
                  "omega JSON must list every site of the box");
  return {dim, L, std::move(values)};
}

}  // namespace breather
