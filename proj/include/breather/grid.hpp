#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace breather {

using Point = std::array<double, 3>;
using RealSparse = Eigen::SparseMatrix<double>;
using ComplexSparse = Eigen::SparseMatrix<std::complex<double>>;

/// Interior mesh of the open box (-L/2, L/2)^d with spacing h = 1/n_h.
///
/// Axis index i = 1..L*n_h-1 maps to coordinate -L/2 + i*h. Points are
/// enumerated lexicographically with the first axis varying slowest.
struct GridSpec {
  int dim = 1;
  int box_side = 1;
  int mesh_per_unit = 1;

  double spacing() const { return 1.0 / mesh_per_unit; }
  int points_per_axis() const { return box_side * mesh_per_unit - 1; }
  std::size_t dof() const;
  double cell_volume() const;  // h^d
  double box_volume() const;   // L^d

  double coordinate(int axis_index) const;
  /// Axis indices (1-based) of the flat point index.
  std::array<int, 3> axis_indices(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, 3>& axis_indices) const;
  Point point(std::size_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

GridSpec build_grid(int dim, int box_side, int mesh_per_unit);

enum class MagneticKind { none, constant_field };

/// Constant field realized with Peierls phases. In d=2,3 the Landau gauge
/// A = (0, B x, 0) is used, in d=1 the constant vector potential A = B.
struct MagneticSpec {
  MagneticKind kind = MagneticKind::none;
  double strength = 0.0;

  bool operator==(const MagneticSpec&) const = default;
};

/// Sparse Hermitian finite-difference Hamiltonian on a GridSpec.
///
/// Stored real when no magnetic field is present, complex otherwise.
/// Immutable after construction.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix(GridSpec grid, RealSparse entries);
  HamiltonianMatrix(GridSpec grid, ComplexSparse entries);

  const GridSpec& grid() const { return grid_; }
  bool is_real() const { return std::holds_alternative<RealSparse>(entries_); }
  std::size_t size() const;

  const RealSparse& real() const { return std::get<RealSparse>(entries_); }
  const ComplexSparse& complex() const { return std::get<ComplexSparse>(entries_); }

  template <class Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), entries_);
  }

  std::complex<double> entry(std::size_t row, std::size_t col) const;
  Eigen::MatrixXcd dense() const;
  /// Max absolute entry; a scale for relative tolerances.
  double max_abs_entry() const;
  /// Gershgorin lower bound on the spectrum.
  double gershgorin_lower() const;

 private:
  GridSpec grid_;
  std::variant<RealSparse, ComplexSparse> entries_;
};

/// H = h^-2 (2d I - sum of Peierls-phased neighbour shifts) + diag(V) with
/// Dirichlet truncation at the box boundary.
HamiltonianMatrix assemble_hamiltonian(const GridSpec& grid, std::span<const double> potential,
                                       const MagneticSpec& magnetic = {});

/// Wrap an explicit Hermitian matrix (tests and small analytic examples).
HamiltonianMatrix hamiltonian_from_dense(const Eigen::MatrixXd& m);
HamiltonianMatrix hamiltonian_from_dense(const Eigen::MatrixXcd& m);

/// Eigenvalues flagged as resolved by the mesh: lambda <= c_fid / h^2.
inline constexpr double kFidelityConstant = 0.1;
double fidelity_cutoff(const GridSpec& grid);

}  // namespace breather
