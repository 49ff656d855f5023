#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "breather/field.hpp"
#include "breather/ssf.hpp"

using namespace breather;

namespace {

Spectrum complete(std::vector<double> v) {
  const std::size_t n = v.size();
  return spectrum_from_values(std::move(v), n, 0.0);
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = normal(rng);
  return r + r.transpose();
}

// Power series F_t(x) = sum_k t^k x^{k/d+1} / (k! (k/d+1)); the tail after K
// terms is bounded by the next term times a geometric factor when it decays.
double ft_series(double t, int d, double x) {
  double sum = 0.0, term_coeff = 1.0;
  for (int k = 1; k < 60; ++k) {
    term_coeff *= t / k;
    sum += term_coeff * std::pow(x, static_cast<double>(k) / d + 1.0) / (static_cast<double>(k) / d + 1.0);
  }
  return sum;
}

}  // namespace

TEST_CASE("spectral shift by direct counting") {
  const auto xi = spectral_shift(complete({1, 2, 3}), complete({1.5, 2, 4}));
  CHECK(xi(1.2) == 1);
  CHECK(xi(2.5) == 0);
  CHECK(xi(3.5) == 1);
  CHECK(xi(0.0) == 0);
  CHECK(xi(1.0) == 1);   // right-continuous counting convention
  CHECK(xi(1.5) == 0);
  CHECK(xi(10.0) == 0);
  const auto same = spectral_shift(complete({1, 2, 3}), complete({1, 2, 3}));
  CHECK(same.breakpoints.empty());
  CHECK(same(2.0) == 0);
}

TEST_CASE("spectral shift respects the completeness cutoff") {
  const auto a = spectrum_from_values({1.0}, 4, 2.0);
  const auto b = spectrum_from_values({1.5}, 4, 3.0);
  const auto xi = spectral_shift(a, b);
  CHECK(xi.cutoff == 2.0);
  CHECK(xi(1.2) == 1);
  CHECK_THROWS_AS(xi(2.5), DomainError);
}

TEST_CASE("rank-one nonnegative perturbations interlace") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30;
    const Eigen::MatrixXd h0 = random_symmetric(n, rng);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    const Eigen::MatrixXd h1 = h0 + v * v.transpose();
    const auto xi = spectral_shift(full_spectrum(hamiltonian_from_dense(h0)), full_spectrum(hamiltonian_from_dense(h1)));
    CHECK(xi.min_value() >= 0);
    CHECK(xi.max_abs() <= 1);
  }
}

TEST_CASE("breather perturbation bounded by its support size") {
  const GridSpec g = build_grid(1, 3, 16);
  std::vector<double> v0(g.dof(), 0.0), v1(g.dof(), 0.0);
  for (std::size_t i = 20; i < 24; ++i) v1[i] = 1.0;
  const auto xi = spectral_shift(full_spectrum(assemble_hamiltonian(g, v0)), full_spectrum(assemble_hamiltonian(g, v1)));
  CHECK(xi.min_value() >= 0);
  CHECK(xi.max_abs() <= 4);
}

TEST_CASE("Krein identity on scalars and constants") {
  const auto g = smooth_switch_test_function(0.5, 1.5);
  const auto r = krein_check(complete({1.0}), complete({2.0}), g);
  CHECK(r.lhs == doctest::Approx(g.value(2.0) - g.value(1.0)));
  CHECK(r.gap < 1e-12);

  const TestFunction constant{[](double) { return 3.0; }, [](double) { return 0.0; }, 5.0, {}};
  const auto c = krein_check(complete({1.0, 4.0}), complete({2.0, 3.0}), constant);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs == 0.0);
}

TEST_CASE("Krein identity on random pairs") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd h0 = random_symmetric(50, rng);
    const Eigen::MatrixXd h1 = h0 + random_symmetric(50, rng) * 0.3;
    const auto g = smooth_switch_test_function(0.3 + 0.5 * std::abs(u(rng)), u(rng));
    const auto r = krein_check(hamiltonian_from_dense(h0), hamiltonian_from_dense(h1), g);
    CHECK(r.gap <= 1e-8 * (1.0 + std::abs(r.lhs)));
  }
}

TEST_CASE("Krein check demands complete spectra") {
  const auto g = smooth_switch_test_function(0.5, 3.0);
  CHECK_THROWS_AS(krein_check(spectrum_from_values({1.0}, 3, 2.0), complete({1.0, 2.0, 5.0}), g), DomainError);
}

TEST_CASE("invariance principle by counting") {
  const auto s0 = complete({1, 3}), s1 = complete({2, 4});
  const auto a = invariance_check(s0, s1, 1.5);
  REQUIRE(a.has_value());
  CHECK(a->lhs == 1);
  CHECK(a->rhs == 1);
  const auto b = invariance_check(s0, s1, 2.5);
  REQUIRE(b.has_value());
  CHECK(b->lhs == 0);
  CHECK(b->rhs == 0);
  CHECK_FALSE(invariance_check(s0, s1, 3.0).has_value());
  const auto same = invariance_check(s0, s0, 2.0);
  CHECK(same->lhs == 0);
  CHECK(same->rhs == 0);
}

TEST_CASE("invariance principle on random pairs with truncated spectra") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd h0 = random_symmetric(20, rng);
    const Eigen::MatrixXd h1 = h0 + random_symmetric(20, rng);
    const auto s0 = eigen_lowest(hamiltonian_from_dense(h0), 6.0, false);
    const auto s1 = eigen_lowest(hamiltonian_from_dense(h1), 6.0, false);
    for (int k = 0; k < 10; ++k) {
      const auto r = invariance_check(s0, s1, u(rng));
      REQUIRE(r.has_value());
      CHECK(r->lhs == r->rhs);
    }
  }
}

TEST_CASE("singular values of the semigroup difference") {
  Eigen::MatrixXd one(1, 1), two(1, 1);
  one << 1.0;
  two << 2.0;
  const auto mu = veff_singular_values(hamiltonian_from_dense(one), hamiltonian_from_dense(two));
  REQUIRE(mu.values.size() == 1);
  CHECK(mu.values[0] == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)));

  const GridSpec g = build_grid(1, 5, 16);
  std::vector<double> v0(g.dof(), 0.0), v1(g.dof(), 0.0);
  for (std::size_t i = 0; i < g.dof(); ++i) {
    const double x = g.point(i)[0];
    if (std::abs(x) < 0.5) v1[i] = 1.0;
  }
  const auto h0 = assemble_hamiltonian(g, v0), h1 = assemble_hamiltonian(g, v1);
  const auto zero = veff_singular_values(h0, h0);
  for (double m : zero.values) CHECK(m == doctest::Approx(0.0).epsilon(1e-14));

  const auto list = veff_singular_values(h0, h1);
  // Pade scaling-and-squaring exponential, independent of the eigendecomposition.
  const Eigen::MatrixXd m0 = -h0.dense().real(), m1 = -h1.dense().real();
  const Eigen::MatrixXd e0 = m0.exp(), e1 = m1.exp();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e1 - e0);
  REQUIRE(list.values.size() == static_cast<std::size_t>(svd.singularValues().size()));
  for (std::size_t i = 0; i < list.values.size(); ++i)
    CHECK(std::abs(list.values[i] - svd.singularValues()(static_cast<Eigen::Index>(i))) <= 1e-10);
  CHECK(std::is_sorted(list.values.rbegin(), list.values.rend()));
}

TEST_CASE("singular value bound closed forms") {
  CHECK(singular_bound(5, 1) == doctest::Approx((std::pow(2.0, 0.25) + 1) * std::exp(-5.0 / 16)));
  CHECK(singular_bound(5, 1) == doctest::Approx(1.6016).epsilon(1e-4));
  CHECK(singular_bound(17, 2) == doctest::Approx((std::sqrt(2.0) + 1) * std::exp(-std::sqrt(17.0) / 16)));
  CHECK_THROWS_AS(singular_bound(4, 1), DomainError);
  CHECK_THROWS_AS(singular_bound(16, 2), DomainError);
}

TEST_CASE("F_t closed form, series oracle and shape") {
  CHECK(ft_eval(1.0 / 32, 1, 32.0) == doctest::Approx(32.0 * (std::numbers::e - 2.0)).epsilon(1e-13));
  for (int d : {1, 2, 3}) CHECK(ft_eval(0.7, d, 0.0) == 0.0);
  for (int d : {2, 3})
    for (double x : {0.5, 4.0, 30.0}) CHECK(std::abs(ft_eval(1.0 / 32, d, x) - ft_series(1.0 / 32, d, x)) <= 1e-10);
  for (int d : {1, 2}) {
    double prev_value = 0.0, prev_slope = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double x = 0.5 * i, f = ft_eval(0.2, d, x);
      CHECK(f >= prev_value);
      const double slope = (f - prev_value) / 0.5;
      CHECK(slope >= prev_slope - 1e-12);
      prev_value = f, prev_slope = slope;
    }
    CHECK(ft_derivative(0.2, d, 0.0) == 0.0);
  }
}

TEST_CASE("integral of F_t along a step function") {
  StepFunction zero{{}, {}, 10.0};
  CHECK(ssf_ft_integral(zero, 5.0, 1.0 / 32, 1) == 0.0);
  StepFunction unit{{0.0, 2.0}, {1, 0}, 10.0};
  CHECK(ssf_ft_integral(unit, 2.0, 1.0 / 32, 1) == doctest::Approx(2.0 * (32 * std::expm1(1.0 / 32) - 1)));
  CHECK(ssf_ft_integral(unit, 2.0, 1.0 / 32, 1) == doctest::Approx(0.031498).epsilon(1e-4));
  CHECK(ssf_ft_integral(unit, 1.0, 1.0 / 32, 1) == doctest::Approx(32 * std::expm1(1.0 / 32) - 1));
  CHECK_THROWS_AS(ssf_ft_integral(unit, 11.0, 1.0 / 32, 1), DomainError);
}

TEST_CASE("universal constants") {
  CHECK(k1_constant(1) == 128.0);
  CHECK(k2_constant(1) == 32.0);
  CHECK(k1_constant(2) == 2.0 * 1024 * 6);
  CHECK(trace_diff_bound(0.0, 100.0, 1.0, 1) == doctest::Approx(128 + 32 * std::log(101.0)));
  CHECK(trace_diff_bound(0.0, 100.0, 1.0, 1) == doctest::Approx(275.68).epsilon(1e-4));
  CHECK(trace_diff_bound(1.5, 0.0, 0.0, 2) == doctest::Approx(k1_constant(2) * std::exp(1.5)));
}

TEST_CASE("Weyl-type lower bound") {
  CHECK(weyl_lower_bound(1, 1.0, 1) == doctest::Approx(2 * std::numbers::pi / std::numbers::e));
  CHECK(weyl_lower_bound(1, 1.0, 1) == doctest::Approx(2.3116).epsilon(1e-4));
  CHECK(weyl_lower_bound(1, 1.0, 2) == doctest::Approx(4.6231).epsilon(1e-4));
  CHECK(std::numbers::pi * std::numbers::pi >= weyl_lower_bound(1, 1.0, 1));
  CHECK_THROWS_AS(weyl_lower_bound(0, 1.0, 1), DomainError);
}

TEST_CASE("Legendre transform and Young inequality") {
  for (int d : {1, 2}) {
    const double t = 1.0 / 32;
    for (double y : {0.0, 0.01, 0.5, 3.0, 40.0}) {
      const auto g = legendre_gt(t, d, y);
      CHECK(g.value >= 0.0);
      CHECK(g.value <= y * std::pow(std::log1p(y) / t, d) + 1e-12);
      if (y > 0.0) {
        CHECK(ft_derivative(t, d, g.search_limit) > y);
        CHECK(g.argmax == doctest::Approx(std::pow(std::log1p(y) / t, d)).epsilon(1e-5));
      }
      for (double x : {0.0, 0.3, 2.0, 17.0, 150.0, 900.0})
        CHECK(x * y <= ft_eval(t, d, x) + g.value + 1e-8);
    }
  }
}

TEST_CASE("counting bound dominates the converged free spectrum") {
  const GridSpec g = build_grid(1, 1, 64);
  const std::vector<double> zero(g.dof(), 0.0);
  const auto spec = eigen_lowest(assemble_hamiltonian(g, zero), fidelity_cutoff(g), false);
  for (double e = 5.0; e <= fidelity_cutoff(g); e += 7.0)
    CHECK(static_cast<double>(spec.count_at_most(e)) <= counting_bound(e, 1.0, 1));
}

TEST_CASE("Hundertmark-Simon majorization on a small pair") {
  const GridSpec g = build_grid(1, 3, 8);
  const auto omega = sample_omega(MeasureSpec{0.1, 0.4}, 1, 3, 3);
  const auto h0 = assemble_hamiltonian(g, std::vector<double>(g.dof(), 0.0));
  const auto h1 = assemble_hamiltonian(g, potential_on_grid(omega, SingleSiteShape::ball, g));
  for (int d : {1, 2}) {
    const auto r = hs_majorization(h0, h1, 1.0 / 32, d);
    CHECK(r.lhs > 0.0);
    CHECK(r.lhs <= r.rhs + 1e-8);
  }
}
