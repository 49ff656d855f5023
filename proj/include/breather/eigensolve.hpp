#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "breather/error.hpp"
#include "breather/grid.hpp"

namespace breather {

/// Dense eigensolver below this size, shift-invert Lanczos above.
inline constexpr std::size_t kDenseThreshold = 2000;
/// Largest matrix for which dense semigroups are formed.
inline constexpr std::size_t kSemigroupGuard = 4000;
/// Relative nudge applied to inertia shifts.
inline constexpr double kInertiaNudge = 1e-12;
/// Relative eigenpair residual ||Hq - lambda q|| / (1 + |lambda|).
inline constexpr double kResidualTolerance = 1e-8;
/// Slack used by inequality checks on computed eigenvalues.
inline constexpr double kInequalitySlack = 10.0 * kResidualTolerance;

/// Nondecreasing eigenvalues (with multiplicity) of a Hermitian matrix, all
/// of those <= cutoff present. Eigenvectors, when stored, are Euclidean
/// orthonormal columns.
struct Spectrum {
  std::vector<double> eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  double cutoff = 0.0;
  std::size_t dimension = 0;

  bool has_vectors() const { return eigenvectors.cols() > 0; }
  bool complete() const { return eigenvalues.size() == dimension; }
  /// #{lambda_i <= x}; x must not exceed the cutoff unless complete.
  std::size_t count_at_most(double x) const;
  std::size_t count_below(double x) const;  // strict
};

/// Spectrum built from an explicit eigenvalue list (cutoff +inf if complete).
Spectrum spectrum_from_values(std::vector<double> values, std::size_t dimension, double cutoff);

/// Solver failure; `partial` holds whatever was certified before giving up.
class EigensolveError : public NumericalError {
 public:
  EigensolveError(const std::string& what, Spectrum partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Spectrum& partial() const { return partial_; }

 private:
  Spectrum partial_;
};

/// #{lambda <= sigma} from the inertia of H - sigma' I, sigma' nudged up by
/// (|sigma| + 1) * 1e-12; on breakdown the nudge doubles, up to 3 retries.
std::size_t count_below(const HamiltonianMatrix& h, double sigma);
/// #{lambda < sigma}, the same with the nudge negated.
std::size_t count_strictly_below(const HamiltonianMatrix& h, double sigma);

/// All eigenvalues <= b, with eigenvectors when requested. Completeness is
/// certified against count_below(b).
Spectrum eigen_lowest(const HamiltonianMatrix& h, double b, bool want_vectors = true);

/// Every eigenvalue (dense path; subject to the semigroup size guard).
Spectrum full_spectrum(const HamiltonianMatrix& h, bool want_vectors = false);

/// #{lambda in [E - eps, E + eps]} by inertia counting.
std::size_t trace_spectral_projector(const HamiltonianMatrix& h, double energy, double eps);
/// Same count from a spectrum complete above energy + eps.
std::size_t trace_spectral_projector(const Spectrum& s, double energy, double eps);

/// exp(-t H) via Hermitian eigendecomposition.
Eigen::MatrixXcd semigroup(const HamiltonianMatrix& h, double t);

/// Cubic smoothstep switch rho: -1 below -eps, 0 above eps, slope at most
/// 3/(4 eps) and total variation 1.
struct SmoothSwitch {
  double epsilon = 1.0;

  double operator()(double x) const;
  double derivative(double x) const;
  double max_derivative() const { return 0.75 / epsilon; }
};

/// sum_i rho(lambda_i - E - offset); needs the spectrum through E + offset + eps.
double trace_rho(const Spectrum& s, double energy, double eps, double offset);
double trace_rho(const HamiltonianMatrix& h, double energy, double eps, double offset);

}  // namespace breather
