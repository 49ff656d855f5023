#include "breather/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "breather/error.hpp"

namespace breather {

std::size_t GridSpec::dof() const {
  std::size_t n = static_cast<std::size_t>(points_per_axis());
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= n;
  return total;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

double GridSpec::box_volume() const { return std::pow(static_cast<double>(box_side), dim); }

double GridSpec::coordinate(int axis_index) const {
  // One correctly rounded division of exact integers.
  return static_cast<double>(2 * axis_index - box_side * mesh_per_unit) / (2.0 * mesh_per_unit);
}

std::array<int, 3> GridSpec::axis_indices(std::size_t flat) const {
  const auto n = static_cast<std::size_t>(points_per_axis());
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n) + 1;
    flat /= n;
  }
  return idx;
}

std::size_t GridSpec::flat_index(const std::array<int, 3>& axis_indices) const {
  const auto n = static_cast<std::size_t>(points_per_axis());
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * n + static_cast<std::size_t>(axis_indices[a] - 1);
  return flat;
}

Point GridSpec::point(std::size_t flat) const {
  const auto idx = axis_indices(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = coordinate(idx[a]);
  return p;
}

GridSpec build_grid(int dim, int box_side, int mesh_per_unit) {
  detail::require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3, got " + std::to_string(dim));
  detail::require(box_side >= 1 && box_side % 2 == 1,
                  "box side L must be a positive odd integer, got " + std::to_string(box_side));
  detail::require(mesh_per_unit >= 1,
                  "mesh_per_unit must be positive, got " + std::to_string(mesh_per_unit));
  return GridSpec{dim, box_side, mesh_per_unit};
}

double fidelity_cutoff(const GridSpec& grid) {
  const double h = grid.spacing();
  return kFidelityConstant / (h * h);
}

// ---------------------------------------------------------------------------

HamiltonianMatrix::HamiltonianMatrix(GridSpec grid, RealSparse entries)
    : grid_(grid), entries_(std::move(entries)) {}

HamiltonianMatrix::HamiltonianMatrix(GridSpec grid, ComplexSparse entries)
    : grid_(grid), entries_(std::move(entries)) {}

std::size_t HamiltonianMatrix::size() const {
  return visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); });
}

std::complex<double> HamiltonianMatrix::entry(std::size_t row, std::size_t col) const {
  return visit([&](const auto& m) {
    return std::complex<double>(m.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)));
  });
}

Eigen::MatrixXcd HamiltonianMatrix::dense() const {
  return visit([](const auto& m) -> Eigen::MatrixXcd {
    return Eigen::MatrixXcd(m.template cast<std::complex<double>>());
  });
}

double HamiltonianMatrix::max_abs_entry() const {
  return visit([](const auto& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (typename std::decay_t<decltype(m)>::InnerIterator it(m, k); it; ++it)
        best = std::max(best, std::abs(it.value()));
    return best;
  });
}

double HamiltonianMatrix::gershgorin_lower() const {
  return visit([](const auto& m) {
    const Eigen::Index n = m.rows();
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0), radius(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (typename std::decay_t<decltype(m)>::InnerIterator it(m, k); it; ++it) {
        if (it.row() == it.col())
          diag[static_cast<std::size_t>(it.row())] = std::real(it.value());
        else
          radius[static_cast<std::size_t>(it.row())] += std::abs(it.value());
      }
    double lower = n > 0 ? diag[0] - radius[0] : 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) lower = std::min(lower, diag[i] - radius[i]);
    return lower;
  });
}

// ---------------------------------------------------------------------------

namespace {

// Phase picked up hopping from point p to p + h e_axis.
double peierls_phase(const GridSpec& grid, const MagneticSpec& magnetic, const Point& p, int axis) {
  if (magnetic.kind == MagneticKind::none) return 0.0;
  const double h = grid.spacing();
  if (grid.dim == 1) return magnetic.strength * h;
  // Landau gauge A = (0, B x, 0).
  return axis == 1 ? magnetic.strength * p[0] * h : 0.0;
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> assemble(const GridSpec& grid, std::span<const double> potential,
                                     const MagneticSpec& magnetic) {
  const std::size_t n = grid.dof();
  const int per_axis = grid.points_per_axis();
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(n * static_cast<std::size_t>(2 * grid.dim + 1));
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i),
                          Scalar(2.0 * grid.dim * inv_h2 + potential[i]));
    const auto idx = grid.axis_indices(i);
    const Point p = grid.point(i);
    for (int axis = 0; axis < grid.dim; ++axis) {
      if (idx[axis] == per_axis) continue;  // Dirichlet: no coupling across the boundary
      auto next = idx;
      ++next[axis];
      const std::size_t j = grid.flat_index(next);
      Scalar hop(-inv_h2);
      if constexpr (!std::is_same_v<Scalar, double>) {
        hop *= std::polar(1.0, peierls_phase(grid, magnetic, p, axis));
      }
      triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), hop);
      if constexpr (std::is_same_v<Scalar, double>)
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), hop);
      else
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), std::conj(hop));
    }
  }
  Eigen::SparseMatrix<Scalar> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

HamiltonianMatrix assemble_hamiltonian(const GridSpec& grid, std::span<const double> potential,
                                       const MagneticSpec& magnetic) {
  detail::require(potential.size() == grid.dof(),
                  "potential has " + std::to_string(potential.size()) + " values, grid has " +
                      std::to_string(grid.dof()) + " points");
  for (double v : potential)
    detail::require(std::isfinite(v) && v >= 0.0, "potential values must be finite and nonnegative");
  if (magnetic.kind == MagneticKind::none) return {grid, assemble<double>(grid, potential, magnetic)};
  return {grid, assemble<std::complex<double>>(grid, potential, magnetic)};
}

namespace {
GridSpec grid_for_size(Eigen::Index n) {
  // A 1-d unit box with n interior points; only used to carry the size.
  return GridSpec{1, 1, static_cast<int>(n) + 1};
}
}  // namespace

HamiltonianMatrix hamiltonian_from_dense(const Eigen::MatrixXd& m) {
  detail::require(m.rows() == m.cols(), "matrix must be square");
  detail::require((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0, "matrix must be symmetric");
  RealSparse s = m.sparseView();
  s.makeCompressed();
  return {grid_for_size(m.rows()), std::move(s)};
}

HamiltonianMatrix hamiltonian_from_dense(const Eigen::MatrixXcd& m) {
  detail::require(m.rows() == m.cols(), "matrix must be square");
  detail::require((m - m.adjoint()).cwiseAbs().maxCoeff() == 0.0, "matrix must be Hermitian");
  ComplexSparse s = m.sparseView();
  s.makeCompressed();
  return {grid_for_size(m.rows()), std::move(s)};
}

}  // namespace breather
