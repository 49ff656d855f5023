#include "breather/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "breather/inertia.hpp"

namespace breather {

std::size_t Spectrum::count_at_most(double x) const {
  if (!complete() && x > cutoff)
    throw DomainError("spectrum queried above its completeness cutoff");
  return static_cast<std::size_t>(std::upper_bound(eigenvalues.begin(), eigenvalues.end(), x) -
                                  eigenvalues.begin());
}

std::size_t Spectrum::count_below(double x) const {
  if (!complete() && x > cutoff)
    throw DomainError("spectrum queried above its completeness cutoff");
  return static_cast<std::size_t>(std::lower_bound(eigenvalues.begin(), eigenvalues.end(), x) -
                                  eigenvalues.begin());
}

Spectrum spectrum_from_values(std::vector<double> values, std::size_t dimension, double cutoff) {
  std::sort(values.begin(), values.end());
  Spectrum s;
  s.dimension = dimension;
  s.cutoff = values.size() == dimension ? std::numeric_limits<double>::infinity() : cutoff;
  s.eigenvalues = std::move(values);
  return s;
}

// ---------------------------------------------------------------------------
// Inertia counting

namespace {

bool is_tridiagonal(const HamiltonianMatrix& h) {
  return h.visit([](const auto& m) {
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (typename std::decay_t<decltype(m)>::InnerIterator it(m, k); it; ++it)
        if (std::abs(it.row() - it.col()) > 1) return false;
    return true;
  });
}

struct CountResult {
  std::size_t negative = 0;
  bool breakdown = false;
};

// Sturm sequence: the LDL^* pivots of a Hermitian tridiagonal matrix.
template <class Scalar>
CountResult sturm_count(const Eigen::SparseMatrix<Scalar>& m, double shift, double tiny) {
  const Eigen::Index n = m.rows();
  CountResult out;
  double pivot = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = std::real(m.coeff(i, i)) - shift;
    if (i > 0) d -= std::norm(m.coeff(i, i - 1)) / pivot;
    if (std::abs(d) <= tiny) {
      out.breakdown = true;
      return out;
    }
    if (d < 0.0) ++out.negative;
    pivot = d;
  }
  return out;
}

template <class Scalar>
CountResult dense_count(const Eigen::SparseMatrix<Scalar>& m, double shift) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Dense a(m);
  a.diagonal().array() -= Scalar(shift);
  BunchKaufman<Scalar> bk(std::move(a));
  return {bk.inertia().negative, bk.breakdown()};
}

template <class Scalar>
CountResult sparse_count(const Eigen::SparseMatrix<Scalar>& m, double shift, double tiny) {
  Eigen::SparseMatrix<Scalar> a = m;
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) -= Scalar(shift);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
  CountResult out;
  if (ldlt.info() != Eigen::Success) {
    out.breakdown = true;
    return out;
  }
  const auto d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double di = std::real(d(i));
    if (!std::isfinite(di) || std::abs(di) <= tiny) {
      out.breakdown = true;
      return out;
    }
    if (di < 0.0) ++out.negative;
  }
  return out;
}

CountResult count_once(const HamiltonianMatrix& h, double shift) {
  const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, h.max_abs_entry());
  const bool tri = is_tridiagonal(h);
  return h.visit([&](const auto& m) {
    if (tri) return sturm_count(m, shift, tiny);
    if (static_cast<std::size_t>(m.rows()) <= kDenseThreshold) return dense_count(m, shift);
    return sparse_count(m, shift, tiny);
  });
}

std::size_t nudged_count(const HamiltonianMatrix& h, double sigma, double direction) {
  if (!std::isfinite(sigma)) throw DomainError("inertia shift must be finite");
  double eta = kInertiaNudge;
  for (int attempt = 0; attempt <= 3; ++attempt, eta *= 2.0) {
    const double shifted = sigma + direction * (std::abs(sigma) + 1.0) * eta;
    const CountResult r = count_once(h, shifted);
    if (!r.breakdown) return r.negative;
  }
  throw NumericalError("inertia factorization broke down at shift " + std::to_string(sigma) +
                       " after 3 retries");
}

}  // namespace

std::size_t count_below(const HamiltonianMatrix& h, double sigma) { return nudged_count(h, sigma, +1.0); }

std::size_t count_strictly_below(const HamiltonianMatrix& h, double sigma) {
  return nudged_count(h, sigma, -1.0);
}

// ---------------------------------------------------------------------------
// Eigenpairs

namespace {

double residual_tolerance(double lambda) { return kResidualTolerance * (1.0 + std::abs(lambda)); }

template <class Scalar>
Spectrum dense_lowest(const Eigen::SparseMatrix<Scalar>& m, double b, std::size_t certified, bool want_vectors,
                      bool tridiagonal) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto options = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Eigen::SelfAdjointEigenSolver<Dense> es;
  if constexpr (std::is_same_v<Scalar, double>) {
    if (tridiagonal) {
      const Eigen::Index n = m.rows();
      Eigen::VectorXd diag(n), sub(std::max<Eigen::Index>(n - 1, 0));
      for (Eigen::Index i = 0; i < n; ++i) diag(i) = m.coeff(i, i);
      for (Eigen::Index i = 0; i + 1 < n; ++i) sub(i) = m.coeff(i + 1, i);
      es.computeFromTridiagonal(diag, sub, options);
    } else {
      es.compute(Dense(m), options);
    }
  } else {
    es.compute(Dense(m), options);
  }
  if (es.info() != Eigen::Success) throw EigensolveError("dense eigensolver failed", Spectrum{});

  Spectrum s;
  s.dimension = static_cast<std::size_t>(m.rows());
  s.cutoff = b;
  const auto& vals = es.eigenvalues();
  const std::size_t k = certified;
  const double scale = std::max(1.0, std::abs(b));
  // The inertia count is authoritative; the dense values must agree with it.
  if (k > 0 && vals(static_cast<Eigen::Index>(k) - 1) > b + 1e-9 * scale)
    throw EigensolveError("dense eigenvalues disagree with the inertia count below " + std::to_string(b), s);
  if (k < s.dimension && vals(static_cast<Eigen::Index>(k)) <= b - 1e-9 * scale)
    throw EigensolveError("dense eigenvalues disagree with the inertia count below " + std::to_string(b), s);
  s.eigenvalues.assign(vals.data(), vals.data() + k);
  if (want_vectors)
    s.eigenvectors = es.eigenvectors().leftCols(static_cast<Eigen::Index>(k)).template cast<std::complex<double>>();
  return s;
}

// Shift-invert Lanczos on (H - sigma I)^{-1} with sigma below the spectrum,
// full reorthogonalization and locking of converged Ritz vectors. Repeated
// runs deflate the locked space, which picks up degenerate copies a single
// Krylov sequence cannot see.
template <class Scalar>
Spectrum lanczos_lowest(const Eigen::SparseMatrix<Scalar>& m, double gershgorin, double b, std::size_t target,
                        bool want_vectors) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  constexpr int kMaxRestarts = 12;

  const Eigen::Index n = m.rows();
  const double sigma = gershgorin - 1.0;
  Eigen::SparseMatrix<Scalar> shifted = m;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= Scalar(sigma);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<Scalar>, Eigen::Lower, Eigen::AMDOrdering<int>> llt(shifted);
  if (llt.info() != Eigen::Success) throw EigensolveError("shift-invert factorization failed", Spectrum{});

  Mat locked(n, 0);
  std::vector<double> locked_values;
  auto count_wanted = [&] {
    return static_cast<std::size_t>(
        std::count_if(locked_values.begin(), locked_values.end(), [&](double v) { return v <= b; }));
  };

  std::mt19937_64 engine(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  Eigen::Index krylov = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(2 * target + 30));

  for (int attempt = 0; attempt < kMaxRestarts && count_wanted() < target; ++attempt) {
    const Eigen::Index room = n - locked.cols();
    const Eigen::Index dim = std::min(krylov, room);
    if (dim <= 0) break;

    auto orthogonalize = [&](Vec& v, const Mat& basis, Eigen::Index cols) {
      for (int pass = 0; pass < 2; ++pass) {
        if (locked.cols() > 0) v -= locked * (locked.adjoint() * v);
        if (cols > 0) v -= basis.leftCols(cols) * (basis.leftCols(cols).adjoint() * v);
      }
    };

    Mat basis(n, dim);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Scalar(normal(engine));
    orthogonalize(v, basis, 0);
    v.normalize();

    std::vector<double> alpha, beta;
    Eigen::Index steps = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      basis.col(j) = v;
      ++steps;
      Vec w = llt.solve(v);
      const double a = std::real(v.dot(w));
      alpha.push_back(a);
      orthogonalize(w, basis, j + 1);
      const double bnorm = w.norm();
      if (j + 1 == dim) break;
      if (bnorm < 1e-13 * std::max(1.0, std::abs(a))) break;  // invariant subspace
      beta.push_back(bnorm);
      v = w / bnorm;
    }

    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), steps);
    Eigen::VectorXd sub(std::max<Eigen::Index>(steps - 1, 0));
    for (Eigen::Index i = 0; i + 1 < steps; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

    // Largest theta first: smallest lambda = sigma + 1/theta.
    for (Eigen::Index r = steps - 1; r >= 0; --r) {
      const double theta = tri.eigenvalues()(r);
      if (theta <= 0.0) continue;
      const double lambda = sigma + 1.0 / theta;
      if (lambda > b + 1.0) continue;
      Vec x = basis.leftCols(steps) * tri.eigenvectors().col(r).template cast<Scalar>();
      orthogonalize(x, basis, 0);
      const double norm = x.norm();
      if (norm < 0.5) continue;
      x /= norm;
      const Vec hx = m * x;
      const double rq = std::real(x.dot(hx));
      if ((hx - rq * x).norm() > residual_tolerance(rq)) continue;
      locked.conservativeResize(n, locked.cols() + 1);
      locked.col(locked.cols() - 1) = x;
      locked_values.push_back(rq);
    }
    krylov = std::min<Eigen::Index>(n, 2 * krylov);
  }

  // Rayleigh-Ritz on the locked space sharpens pairs inside degenerate clusters.
  Spectrum s;
  s.dimension = static_cast<std::size_t>(n);
  s.cutoff = b;
  if (locked.cols() > 0) {
    const Mat projected = locked.adjoint() * (m * locked);
    Eigen::SelfAdjointEigenSolver<Mat> rr(0.5 * (projected + projected.adjoint()));
    const Mat vectors = locked * rr.eigenvectors();
    for (Eigen::Index i = 0; i < rr.eigenvalues().size(); ++i) {
      const double lambda = rr.eigenvalues()(i);
      if (lambda > b) break;
      s.eigenvalues.push_back(lambda);
    }
    if (want_vectors)
      s.eigenvectors =
          vectors.leftCols(static_cast<Eigen::Index>(s.eigenvalues.size())).template cast<std::complex<double>>();
  }
  if (s.eigenvalues.size() != target)
    throw EigensolveError("Lanczos found " + std::to_string(s.eigenvalues.size()) + " of " +
                              std::to_string(target) + " eigenvalues below " + std::to_string(b) + " after " +
                              std::to_string(kMaxRestarts) + " restarts",
                          s);
  return s;
}

}  // namespace

Spectrum eigen_lowest(const HamiltonianMatrix& h, double b, bool want_vectors) {
  if (!std::isfinite(b)) throw DomainError("eigenvalue cutoff must be finite");
  const std::size_t target = count_below(h, b);
  if (target == 0) {
    Spectrum s;
    s.dimension = h.size();
    s.cutoff = b;
    return s;
  }
  const bool tri = is_tridiagonal(h);
  const double gershgorin = h.gershgorin_lower();
  return h.visit([&](const auto& m) {
    if (static_cast<std::size_t>(m.rows()) <= kDenseThreshold) return dense_lowest(m, b, target, want_vectors, tri);
    return lanczos_lowest(m, gershgorin, b, target, want_vectors);
  });
}

Spectrum full_spectrum(const HamiltonianMatrix& h, bool want_vectors) {
  if (h.size() > kSemigroupGuard)
    throw DomainError("full spectrum requested for a matrix larger than " + std::to_string(kSemigroupGuard));
  const bool tri = is_tridiagonal(h);
  Spectrum s = h.visit([&](const auto& m) {
    return dense_lowest(m, std::numeric_limits<double>::max(), static_cast<std::size_t>(m.rows()), want_vectors, tri);
  });
  s.cutoff = std::numeric_limits<double>::infinity();
  return s;
}

std::size_t trace_spectral_projector(const HamiltonianMatrix& h, double energy, double eps) {
  if (!(eps > 0.0)) throw DomainError("window half-width eps must be positive");
  const std::size_t upper = count_below(h, energy + eps);
  const std::size_t lower = count_strictly_below(h, energy - eps);
  return upper - std::min(upper, lower);
}

std::size_t trace_spectral_projector(const Spectrum& s, double energy, double eps) {
  if (!(eps > 0.0)) throw DomainError("window half-width eps must be positive");
  return s.count_at_most(energy + eps) - s.count_below(energy - eps);
}

Eigen::MatrixXcd semigroup(const HamiltonianMatrix& h, double t) {
  if (!(t > 0.0)) throw DomainError("semigroup time must be positive");
  if (h.size() > kSemigroupGuard)
    throw DomainError("semigroup requested for a matrix larger than " + std::to_string(kSemigroupGuard));
  const Spectrum s = full_spectrum(h, true);
  Eigen::VectorXd weights(static_cast<Eigen::Index>(s.eigenvalues.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) weights(i) = std::exp(-t * s.eigenvalues[static_cast<std::size_t>(i)]);
  return s.eigenvectors * weights.asDiagonal() * s.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------

double SmoothSwitch::operator()(double x) const {
  const double u = std::clamp((x + epsilon) / (2.0 * epsilon), 0.0, 1.0);
  return -1.0 + u * u * (3.0 - 2.0 * u);
}

double SmoothSwitch::derivative(double x) const {
  const double u = (x + epsilon) / (2.0 * epsilon);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 6.0 * u * (1.0 - u) / (2.0 * epsilon);
}

double trace_rho(const Spectrum& s, double energy, double eps, double offset) {
  if (!(eps > 0.0)) throw DomainError("switch width eps must be positive");
  const double reach = energy + offset + eps;
  if (!s.complete() && s.cutoff < reach)
    throw DomainError("spectrum cutoff lies below E + offset + eps");
  const SmoothSwitch rho{eps};
  double total = 0.0;
  for (double lambda : s.eigenvalues) {
    const double x = lambda - energy - offset;
    if (x >= eps) break;
    total += rho(x);
  }
  return total;
}

double trace_rho(const HamiltonianMatrix& h, double energy, double eps, double offset) {
  return trace_rho(eigen_lowest(h, energy + offset + eps, false), energy, eps, offset);
}

}  // namespace breather
