#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "breather/rng.hpp"
#include "breather/wegner.hpp"

using namespace breather;

namespace {

WegnerParams base_params() {
  WegnerParams p;
  p.b = 10.0;
  p.energy = 5.0;
  p.epsilon = 0.5;
  p.measure = MeasureSpec{0.1, 0.4};
  p.grid = build_grid(1, 3, 16);
  p.n_samples = 40;
  p.master_seed = 1;
  return p;
}

}  // namespace

TEST_CASE("delta selection and epsilon_max closed forms") {
  CHECK(delta_from_epsilon(0.01, {1.0, 1.0}) == doctest::Approx(0.08));
  CHECK(delta_from_epsilon(0.005, {0.5, 2.0}) == doctest::Approx(0.0032));
  CHECK(epsilon_max({1.0, 2.0}, 0.3) == doctest::Approx(0.0025));
  CHECK(epsilon_max({1.0, 1.0}, 0.25) == doctest::Approx(0.03125));
  for (double wp : {0.1, 0.25, 0.4}) {
    const UcpConstants c{0.7, 1.0};
    CHECK(delta_from_epsilon(epsilon_max(c, wp), c) == doctest::Approx(0.5 - wp));
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const UcpConstants c{1e-3 + (1 - 1e-3) * uniform01(rng), 1.0 + 5.0 * uniform01(rng)};
    const double wp = 0.499 * uniform01(rng);
    const double em = epsilon_max(c, wp);
    CHECK(em < 0.5);
    CHECK(delta_from_epsilon(em, c) <= 0.5 - wp + 1e-15);
  }
}

TEST_CASE("Wegner constant and right-hand side") {
  CHECK(wegner_constant(1, 0.0) == 384.0);
  const double rhs = wegner_rhs(0.01, 3, 1, 0.0, {1.0, 1.0}, 4.0);
  CHECK(rhs == doctest::Approx(384.0 * 4 * 4 * 0.01 * std::log(100.0) * 3));
  CHECK(rhs == doctest::Approx(848.8).epsilon(1e-4));
  const double a = wegner_rhs(1e-3, 3, 1, 0.0, {1.0, 1.0}, 4.0), b = wegner_rhs(1e-4, 3, 1, 0.0, {1.0, 1.0}, 4.0);
  CHECK(a / b == doctest::Approx(10.0 * std::log(1e-3) / std::log(1e-4)));
  CHECK_THROWS_AS(wegner_rhs(0.0, 3, 1, 0.0, {1.0, 1.0}, 4.0), DomainError);
  CHECK_THROWS_AS(wegner_rhs(1.0, 3, 1, 0.0, {1.0, 1.0}, 4.0), DomainError);
}

TEST_CASE("parameter validation") {
  auto p = base_params();
  CHECK_NOTHROW(p.validate());
  p.energy = 9.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = base_params();
  p.constants = UcpConstants{1.0, 1.0};
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.epsilon = 0.01;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("Monte Carlo below the spectrum is exactly zero") {
  auto p = base_params();
  p.energy = -2.0;
  p.epsilon = 0.5;
  const auto r = wegner_expectation(p);
  CHECK(r.mean == 0.0);
  CHECK(r.stderr_mean == 0.0);
  CHECK(r.excluded == 0);
}

TEST_CASE("degenerate measure gives identical samples") {
  auto p = base_params();
  p.measure = MeasureSpec{0.2, 0.2 + 1e-15};
  const auto r = wegner_expectation(p);
  for (long c : r.counts) CHECK(c == r.counts.front());
  CHECK(r.stderr_mean == doctest::Approx(0.0));
}

TEST_CASE("Monte Carlo counts match dense recomputation") {
  auto p = base_params();
  p.n_samples = 200;
  const auto r = wegner_expectation(p, 3);
  double sum = 0.0;
  for (std::size_t s = 1; s <= p.n_samples; ++s) {
    const auto omega = sample_omega(p.measure, 1, 3, derive_seed(p.master_seed, s));
    const auto h = assemble_hamiltonian(p.grid, potential_on_grid(omega, p.shape, p.grid));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense(), Eigen::EigenvaluesOnly);
    long count = 0;
    for (double v : es.eigenvalues()) count += v >= p.energy - p.epsilon && v <= p.energy + p.epsilon;
    CHECK(r.counts[s - 1] == count);
    CHECK(r.sample_index[s - 1] == s);
    sum += static_cast<double>(count);
  }
  CHECK(r.mean == doctest::Approx(sum / 200.0).epsilon(1e-15));
  CHECK_FALSE(r.rhs_bound.has_value());
}

TEST_CASE("Monte Carlo is independent of the thread count") {
  auto p = base_params();
  const auto a = wegner_expectation(p, 1), b = wegner_expectation(p, 8);
  CHECK(a.counts == b.counts);
  CHECK(a.sample_seed == b.sample_seed);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_mean == b.stderr_mean);
}

TEST_CASE("rho sandwich") {
  const auto one = spectrum_from_values({1.0}, 1, 0.0);
  const auto r = sandwich_check(one, 1.0, 0.1);
  CHECK(r.lhs == 1.0);
  CHECK(r.rhs == doctest::Approx(1.0));
  const auto far = spectrum_from_values({0.0, 5.0}, 2, 0.0);
  const auto f = sandwich_check(far, 2.5, 0.1);
  CHECK(f.lhs == 0.0);
  CHECK(f.rhs == doctest::Approx(0.0));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(30);
    for (double& x : v) x = u(rng);
    const auto s = spectrum_from_values(v, v.size(), 0.0);
    const double eps = 0.01 + 0.5 * u(rng) / 10.0;
    const auto c = sandwich_check(s, u(rng), eps);
    CHECK(c.lhs <= c.rhs + 1e-9);
  }
}

TEST_CASE("telescope identities") {
  const GridSpec g1 = build_grid(1, 1, 16);
  const OmegaSample single(1, 1, {0.2});
  const auto t1 = telescope(single, 0.05, 20.0, 0.5, 40.0, g1, SingleSiteShape::ball, {});
  CHECK(t1.sites == 1);
  CHECK(t1.max_defect() <= 1e-8);

  const GridSpec g = build_grid(1, 3, 16);
  const auto omega = sample_omega(MeasureSpec{0.1, 0.4}, 1, 3, 11);
  const auto zero = telescope(omega, 0.0, 20.0, 0.5, 40.0, g, SingleSiteShape::ball, {});
  for (std::size_t n = 0; n < zero.sites; ++n) CHECK(zero.theta_high[n] == zero.theta_low[n]);
  CHECK(zero.trace_after == zero.trace_before);

  const auto t = telescope(omega, 0.05, 20.0, 0.5, 40.0, g, SingleSiteShape::ball, {});
  CHECK(t.sites == 3);
  CHECK(t.chain_defect <= 1e-8);
  CHECK(t.endpoint_defect <= 1e-8);
  CHECK(t.sum_defect <= 1e-8);
  for (std::size_t n = 0; n < t.sites; ++n) CHECK(t.theta_high[n] >= t.theta_low[n] - 1e-9);
}

TEST_CASE("monotone table") {
  const MonotoneTable t({0.0, 1.0, 2.0}, {0.0, 1.0, 1.0});
  CHECK(t(0.5) == doctest::Approx(0.5));
  CHECK(t(2.0) == 1.0);
  CHECK_THROWS_AS(t(2.5), DomainError);
  CHECK_THROWS_AS(MonotoneTable({0.0, 1.0}, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(MonotoneTable({0.0, 0.0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("averaging lemma closed forms") {
  const MeasureSpec uniform{0.0, 0.25};
  std::vector<double> nodes, values;
  for (int i = 0; i <= 35; ++i) nodes.push_back(i * 0.01), values.push_back(i * 0.01);
  const auto r = averaging_lemma_check(MonotoneTable(nodes, values), uniform, 0.1);
  CHECK(r.lhs == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(0.14).epsilon(1e-12));
  const auto c = averaging_lemma_check(MonotoneTable({0.0, 0.35}, {2.0, 2.0}), uniform, 0.1);
  CHECK(c.lhs == doctest::Approx(0.0));
  CHECK(c.rhs == doctest::Approx(0.0));
  CHECK_THROWS_AS(averaging_lemma_check(MonotoneTable({0.0, 0.3}, {0.0, 1.0}), uniform, 0.1), DomainError);
}

TEST_CASE("averaging lemma on tabulated Theta") {
  const GridSpec g = build_grid(1, 3, 16);
  const MeasureSpec m{0.1, 0.35, DensityKind::truncated_linear, 20.0};
  const auto omega = sample_omega(m, 1, 3, 5);
  const double delta = 0.1;
  for (std::size_t n = 1; n <= 3; ++n) {
    const ThetaFunction theta(omega, delta, n, 15.0, 0.5, g, SingleSiteShape::ball, {});
    std::vector<double> nodes;
    for (int i = 0; i <= 35; ++i) nodes.push_back(m.omega_minus + i * (m.width() + delta) / 35);
    const auto table = tabulate(theta, nodes);
    const auto r = averaging_lemma_check(table, m, delta);
    CHECK(r.lhs <= r.rhs + 1e-10);
  }
}

TEST_CASE("Theta spread bound") {
  const auto r = theta_spread_bound(0.0, 0.0, 0.01, 1, 0.0);
  CHECK(r.bound == doctest::Approx(192.0 * std::log(100.0)));
  CHECK(r.bound == doctest::Approx(884.2).epsilon(1e-4));
  CHECK(r.holds);
  CHECK_THROWS_AS(theta_spread_bound(0.0, 1.0, 0.6, 1, 0.0), DomainError);
}

TEST_CASE("IDS basics and Hoelder fit") {
  IdsRequest req;
  req.box_sides = {3, 5};
  req.energies = {-1.0, 5.0, 20.0, 60.0};
  req.measure = MeasureSpec{0.1, 0.4};
  req.n_samples = 20;
  req.master_seed = 3;
  const auto rows = ids_estimate(req, 2);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].ids == 0.0);
  CHECK(rows[4].ids == 0.0);
  for (std::size_t i = 1; i < 4; ++i) CHECK(rows[i].ids >= rows[i - 1].ids);
  CHECK(ids_estimate(req, 1).front().ids == rows.front().ids);

  std::vector<IdsRow> synthetic;
  for (double e : {9.0, 9.9, 9.99, 10.01, 10.1, 11.0}) synthetic.push_back({5, e, std::cbrt(e - 10.0) + 5.0, 0.0});
  const std::vector<double> eps{0.01, 0.1, 1.0};
  const auto fit = hoelder_fit(synthetic, 10.0, eps);
  CHECK_FALSE(fit.below_resolution);
  CHECK(fit.slope == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  std::vector<IdsRow> flat;
  for (double e : {9.0, 9.9, 9.99, 10.01, 10.1, 11.0}) flat.push_back({5, e, 1.0, 0.0});
  CHECK(hoelder_fit(flat, 10.0, eps).below_resolution);
  const std::vector<double> missing{0.5, 1.0};
  CHECK_THROWS_AS(hoelder_fit(flat, 10.0, missing), DomainError);
}

TEST_CASE("IDS of a nearly free operator follows Weyl asymptotics") {
  IdsRequest req;
  req.box_sides = {7};
  req.measure = MeasureSpec{0.0, 1e-15};
  req.mesh_per_unit = 32;
  req.n_samples = 1;
  for (double e : {20.0, 40.0, 80.0}) req.energies.push_back(e);
  const auto rows = ids_estimate(req);
  for (const auto& r : rows) CHECK(std::abs(r.ids - std::sqrt(r.energy) / std::numbers::pi) <= 1.0 / 7 + 0.02);
}

TEST_CASE("trace monotonicity under the lifted shift") {
  const GridSpec g = build_grid(1, 3, 16);
  const UcpConstants c{0.5, 1.0};
  const double energy = 12.0, eps = 0.02;
  int exercised = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto omega = sample_omega(MeasureSpec{0.05, 0.15}, 1, 3, seed);
    const auto r = trace_monotonicity_check(omega, energy, eps, c, g, SingleSiteShape::ball, {});
    CHECK(r.delta == doctest::Approx(0.32));
    // The inequality is implied when every contributing eigenvalue lifts by at least 4 eps.
    const auto lift = lifting_check(omega, r.delta, c, energy + 3 * eps + 1.0, g, SingleSiteShape::ball, {});
    const bool lifted = std::all_of(lift.entries.begin(), lift.entries.end(),
                                    [](const LiftingEntry& e) { return e.lifting_margin >= 0.0; });
    if (!lifted) continue;
    ++exercised;
    CHECK(r.lhs <= r.rhs + 1e-8);
  }
  CHECK(exercised > 0);
}
