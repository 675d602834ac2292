#include <doctest.h>

#include <chrono>

#include "lotdecomp/exact_ot.hpp"
#include "oracles.hpp"

using namespace lotdecomp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd col(std::initializer_list<double> v) {
  MatrixXd m(v.size(), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Index support_size(const MatrixXd& g) { return (g.array() > 0.0).count(); }

}  // namespace

TEST_CASE("cost matrix") {
  MatrixXd p(1, 2), q(1, 2);
  p << 0, 0;
  q << 3, 4;
  CHECK(cost_matrix(EmpiricalMeasured::uniform(p), EmpiricalMeasured::uniform(q))(0, 0) == 25.0);

  auto nu = EmpiricalMeasured::uniform(col({0, 1}));
  auto mu = EmpiricalMeasured::uniform(col({0.5, 1.5}));
  MatrixXd expect(2, 2);
  expect << 0.25, 2.25, 0.25, 0.25;
  CHECK(cost_matrix(nu, mu) == expect);

  std::mt19937_64 rng(3);
  auto r = oracle::random_measure(6, 3, rng);
  const MatrixXd D = cost_matrix(r, r);
  CHECK(D.diagonal().isZero(0.0));
  CHECK(D == D.transpose());

  CHECK_THROWS_AS(cost_matrix(nu, EmpiricalMeasured::uniform(MatrixXd::Zero(2, 2))), Error);
}

TEST_CASE("solve_w2 small cases") {
  MatrixXd p(1, 2), q(1, 2);
  p << 0, 0;
  q << 3, 4;
  auto r = solve_w2(EmpiricalMeasured::uniform(p), EmpiricalMeasured::uniform(q));
  CHECK(r.cost == 25.0);
  CHECK(r.coupling.matrix()(0, 0) == 1.0);

  // the two permutation couplings cost 0.25 and 1.25
  auto nu = EmpiricalMeasured::uniform(col({0, 1}));
  auto mu = EmpiricalMeasured::uniform(col({0.5, 1.5}));
  auto s = solve_w2(nu, mu);
  CHECK(s.cost == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.coupling.matrix()(0, 0) == 0.5);
  CHECK(s.coupling.matrix()(1, 1) == 0.5);
  CHECK(s.dual_gap <= 1e-9 * (1 + s.cost));

  std::mt19937_64 rng(11);
  auto m = oracle::random_measure(9, 2, rng);
  auto self = solve_w2(m, m);
  CHECK(self.cost <= 1e-12);
  // cheapest plan keeps every atom in place
  CHECK(self.coupling.matrix().diagonal().isApprox(m.weights()));
}

TEST_CASE("solve_w2 is deterministic") {
  std::mt19937_64 rng(5);
  auto nu = oracle::random_measure(12, 3, rng);
  auto mu = oracle::random_measure(17, 3, rng);
  auto a = solve_w2(nu, mu);
  auto b = solve_w2(nu, mu);
  CHECK(a.cost == b.cost);
  CHECK(a.coupling.matrix() == b.coupling.matrix());
}

TEST_CASE("solve_w2 metric sanity on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 30), dim(1, 5);
  for (int t = 0; t < 100; ++t) {
    const Index d = dim(rng);
    auto nu = oracle::random_measure(size(rng), d, rng);
    auto mu = oracle::random_measure(size(rng), d, rng);
    auto rho = oracle::random_measure(size(rng), d, rng);
    auto nm = solve_w2(nu, mu);
    auto mn = solve_w2(mu, nu);
    CHECK(oracle::rel_err(nm.cost, mn.cost) <= 1e-9);
    CHECK(solve_w2(nu, nu).cost <= 1e-12);
    const double dnm = std::sqrt(nm.cost);
    const double dnr = std::sqrt(solve_w2(nu, rho).cost);
    const double drm = std::sqrt(solve_w2(rho, mu).cost);
    CHECK(dnm <= dnr + drm + 1e-7);
    // basic solution and consistent reporting
    CHECK(support_size(nm.coupling.matrix()) <= nu.size() + mu.size() - 1);
    const double direct = (nm.coupling.matrix().array() * cost_matrix(nu, mu).array()).sum();
    CHECK(oracle::rel_err(nm.cost, direct) <= 1e-9);
    CHECK(nm.dual_gap <= 1e-9 * (1 + nm.cost));
  }
}

TEST_CASE("solve_w2 matches vertex enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 8), dim(1, 4);
  int checked = 0;
  while (checked < 150) {
    const Index n = size(rng), m = size(rng);
    if (n * m > 64) continue;
    const Index d = dim(rng);
    const bool uniform = checked % 3 == 0 && n == m;
    auto nu = oracle::random_measure(n, d, rng, uniform);
    auto mu = oracle::random_measure(m, d, rng, uniform);
    const double lp = solve_w2(nu, mu).cost;
    const double brute = solve_w2_oracle(nu, mu).cost;
    CHECK(std::abs(lp - brute) <= 1e-9 * (1 + brute));
    ++checked;
  }
}

TEST_CASE("oracle special cases") {
  std::mt19937_64 rng(8);
  auto nu = EmpiricalMeasured::dirac(VectorXd::Zero(2));
  auto mu = oracle::random_measure(5, 2, rng);
  auto r = solve_w2_oracle(nu, mu);
  CHECK(r.coupling.matrix().row(0).transpose().isApprox(mu.weights()));
  CHECK(r.cost == doctest::Approx(mu.weights().dot(cost_matrix(nu, mu).row(0).transpose())));

  // uniform 3x3 is the minimum over the six permutations
  auto x = oracle::random_measure(3, 2, rng, true);
  auto y = oracle::random_measure(3, 2, rng, true);
  const MatrixXd D = cost_matrix(x, y);
  double best = INFINITY;
  for (const auto& g : oracle::permutation_couplings(3)) best = std::min(best, (g.array() * D.array()).sum());
  CHECK(solve_w2_oracle(x, y).cost == doctest::Approx(best).epsilon(1e-12));

  CHECK(solve_w2_oracle(x, x).cost == 0.0);

  auto big = oracle::random_measure(9, 1, rng);
  CHECK_THROWS_AS(solve_w2_oracle(big, big), Error);
}

TEST_CASE("degenerate transportation problems") {
  // equal partial sums create degenerate bases
  VectorXd a = VectorXd::Constant(6, 1.0 / 6), b = VectorXd::Constant(3, 1.0 / 3);
  MatrixXd cost = MatrixXd::Ones(6, 3);
  auto r = solve_transport(a, b, cost);
  CHECK(r.cost == doctest::Approx(1.0));
  // all-zero cost, many ties
  auto z = solve_transport<double>(a, a, MatrixXd::Zero(6, 6));
  CHECK(z.cost == 0.0);
  // integer grid with many equal costs
  MatrixXd pts(16, 2);
  for (int i = 0; i < 16; ++i) pts.row(i) << i % 4, i / 4;
  auto grid = EmpiricalMeasured::uniform(pts);
  MatrixXd shifted = pts;
  shifted.col(0).array() += 1.0;
  auto moved = EmpiricalMeasured::uniform(shifted);
  CHECK(solve_w2(grid, moved).cost == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("solve_w2 speed at barycenter scale") {
  std::mt19937_64 rng(1);
  auto nu = oracle::random_measure(10, 2, rng, true);
  auto mu = oracle::random_measure(100, 2, rng, true);
  const auto start = std::chrono::steady_clock::now();
  double sink = 0;
  for (int i = 0; i < 200; ++i) sink += solve_w2(nu, mu).cost;
  const double per_call =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 200;
  MESSAGE("10x100 solve: " << per_call * 1e6 << " us");
  CHECK(sink > 0);
  CHECK(per_call < 0.05);
}

TEST_CASE("warm starts reach the same optimum") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 40; ++t) {
    auto nu = oracle::random_measure(1 + t % 9, 2, rng, t % 2 == 0);
    auto mu = oracle::random_measure(5 + t % 13, 2, rng, t % 3 == 0);
    const auto cold = solve_w2(nu, mu);
    // optimum for perturbed support points, then re-solve from it
    MatrixXd jitter = nu.points() + 0.3 * oracle::random_points(nu.size(), 2, rng);
    EmpiricalMeasured near(nu.weights(), jitter);
    const auto seed = solve_w2(near, mu);
    const auto warm = solve_w2(nu, mu, {}, &seed.coupling.matrix());
    CHECK(oracle::rel_err(warm.cost, cold.cost) <= 1e-12);
    CHECK(warm.dual_gap <= 1e-10);
    // the product coupling is a basis only for a single row
    const MatrixXd product = nu.weights() * mu.weights().transpose();
    const auto ignored = solve_w2(nu, mu, {}, &product);
    if (nu.size() > 1)
      CHECK(ignored.cost == cold.cost);
    else
      CHECK(oracle::rel_err(ignored.cost, cold.cost) <= 1e-12);
    // wrong marginals are ignored too
    MatrixXd wrong = seed.coupling.matrix() * 2.0;
    CHECK(solve_w2(nu, mu, {}, &wrong).cost == cold.cost);
  }
}
