#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace breather {

/// Signature (n_-, n_0, n_+) of a Hermitian matrix.
struct Inertia {
  std::size_t negative = 0;
  std::size_t zero = 0;
  std::size_t positive = 0;

  bool operator==(const Inertia&) const = default;
};

/// Dense Hermitian LDL^* with Bunch-Kaufman diagonal pivoting (1x1 and 2x2
/// blocks). Only the block diagonal D is retained; by Sylvester's law its
/// inertia equals that of the input.
///
/// A pivot below 16 eps max|a_ij| is counted as zero and flags the
/// factorization as broken down: the shift sits numerically on an eigenvalue.
template <class Scalar>
class BunchKaufman {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BunchKaufman() = default;
  explicit BunchKaufman(Matrix a) { compute(std::move(a)); }

  BunchKaufman& compute(Matrix a) {
    inertia_ = {};
    breakdown_ = false;
    const Eigen::Index n = a.rows();
    const double scale = n > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * (scale > 0.0 ? scale : 1.0);
    const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

    Eigen::Index k = 0;
    while (k < n) {
      const Eigen::Index rest = n - k - 1;
      const double akk = std::abs(std::real(a(k, k)));
      double colmax = 0.0;
      Eigen::Index r = k;
      if (rest > 0) colmax = a.col(k).tail(rest).cwiseAbs().maxCoeff(&r), r += k + 1;

      if (std::max(akk, colmax) <= tiny) {
        // Column is numerically zero: a zero pivot.
        ++inertia_.zero;
        breakdown_ = true;
        ++k;
        continue;
      }

      int block = 1;
      if (akk < alpha * colmax) {
        // Largest off-diagonal magnitude in row/column r of the trailing block.
        double rowmax = 0.0;
        for (Eigen::Index j = k; j < n; ++j)
          if (j != r) rowmax = std::max(rowmax, std::abs(a(r, j)));
        if (akk * rowmax >= alpha * colmax * colmax) {
          block = 1;
        } else if (std::abs(std::real(a(r, r))) >= alpha * rowmax) {
          swap_symmetric(a, k, r);
        } else {
          block = 2;
          swap_symmetric(a, k + 1, r);
        }
      }

      if (block == 1) {
        const double d = std::real(a(k, k));
        record_1x1(d, tiny);
        if (rest > 0 && std::abs(d) > tiny) {
          auto col = a.col(k).tail(rest);
          a.bottomRightCorner(rest, rest).noalias() -= (col / d) * col.adjoint();
        }
        ++k;
      } else {
        const double d11 = std::real(a(k, k));
        const double d22 = std::real(a(k + 1, k + 1));
        const Scalar d21 = a(k + 1, k);
        const double det = d11 * d22 - std::norm(d21);
        record_2x2(d11, d22, det, tiny);
        const Eigen::Index tail = n - k - 2;
        if (tail > 0 && std::abs(det) > tiny * tiny) {
          // W = A21 D^-1, D^-1 = [d22 -d12; -d21 d11] / det with d12 = conj(d21).
          Matrix a21 = a.block(k + 2, k, tail, 2);
          Matrix w(tail, 2);
          w.col(0) = (a21.col(0) * d22 - a21.col(1) * d21) / det;
          w.col(1) = (a21.col(1) * d11 - a21.col(0) * Eigen::numext::conj(d21)) / det;
          a.bottomRightCorner(tail, tail).noalias() -= w * a21.adjoint();
        }
        k += 2;
      }
    }
    return *this;
  }

  const Inertia& inertia() const { return inertia_; }
  bool breakdown() const { return breakdown_; }

 private:
  static void swap_symmetric(Matrix& a, Eigen::Index i, Eigen::Index j) {
    if (i == j) return;
    a.row(i).swap(a.row(j));
    a.col(i).swap(a.col(j));
  }

  void record_1x1(double d, double tiny) {
    if (std::abs(d) <= tiny) {
      ++inertia_.zero;
      breakdown_ = true;
    } else if (d < 0.0) {
      ++inertia_.negative;
    } else {
      ++inertia_.positive;
    }
  }

  void record_2x2(double d11, double d22, double det, double tiny) {
    // Bunch-Kaufman only selects 2x2 blocks with |d21|^2 dominating, so a
    // negative determinant is the generic case: one eigenvalue of each sign.
    if (std::abs(det) <= tiny * tiny) {
      ++inertia_.zero;
      breakdown_ = true;
      if (d11 + d22 < 0.0) ++inertia_.negative; else ++inertia_.positive;
    } else if (det < 0.0) {
      ++inertia_.negative;
      ++inertia_.positive;
    } else if (d11 + d22 < 0.0) {
      inertia_.negative += 2;
    } else {
      inertia_.positive += 2;
    }
  }

  Inertia inertia_{};
  bool breakdown_ = false;
};

}  // namespace breather
