#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gmrf/linops.hpp"
#include "gmrf/oracle.hpp"
#include "gmrf/random.hpp"

using namespace gmrf;

namespace {

double rel_err_inf(const GridMap& got, const GridMap& want) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < got.size(); ++i) {
    num = std::max(num, std::abs(got[i] - want[i]));
    den = std::max(den, std::abs(want[i]));
  }
  return num / std::max(den, 1e-300);
}

GridMap random_map(GridShape shape, uint64_t seed) {
  NormalSampler rng(seed);
  return normal_map(shape, rng);
}

}  // namespace

TEST_CASE("identity maps: every direction is the identity operator") {
  const CholeskyMaps maps = CholeskyMaps::identity({3, 4});
  const GridMap x = random_map(maps.shape, 11);
  for (Direction dir : {Direction::lower, Direction::lower_transpose, Direction::precision}) {
    const GridMap y = apply({maps, dir}, x);
    for (int i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-15));
  }
}

TEST_CASE("1x2 grid L^T apply matches the hand-computed 2x2 matrix") {
  // L = [[1, 0], [0.5, 1]]: pixel 1 has pixel 0 as its (0,-1) neighbor.
  CholeskyMaps maps = CholeskyMaps::identity({1, 2});
  const int offset_0m1 = 3;  // canonical order: (-1,-1),(-1,0),(-1,1),(0,-1)
  maps.off_diag[offset_0m1].values = {0.0, 0.5};

  GridMap x(maps.shape);
  x.values = {1.0, 1.0};
  const GridMap y = apply({maps, Direction::lower_transpose}, x);
  CHECK(y[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));

  const GridMap z = apply({maps, Direction::lower}, x);
  CHECK(z[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("apply matches the dense oracle on random 6x6 models") {
  for (uint64_t seed : {1u, 2u, 3u, 4u}) {
    const StructuredGaussian g = random_model({6, 6}, seed % 2 ? 1 : 2, seed % 3 == 0, seed);
    const Eigen::MatrixXd lower = dense_lower_factor(g.chol);
    const GridMap x = random_map(g.shape(), seed + 100);
    const Eigen::Map<const Eigen::VectorXd> xv(x.values.data(), x.size());

    GridMap want(g.shape());
    Eigen::Map<Eigen::VectorXd>(want.values.data(), x.size()) = lower * xv;
    CHECK(rel_err_inf(apply({g.chol, Direction::lower}, x), want) < 1e-12);

    Eigen::Map<Eigen::VectorXd>(want.values.data(), x.size()) = lower.transpose() * xv;
    CHECK(rel_err_inf(apply({g.chol, Direction::lower_transpose}, x), want) < 1e-12);

    Eigen::Map<Eigen::VectorXd>(want.values.data(), x.size()) =
        lower * (lower.transpose() * xv);
    CHECK(rel_err_inf(apply({g.chol, Direction::precision}, x), want) < 1e-12);
  }
}

TEST_CASE("precision apply equals L after L^T composition") {
  const StructuredGaussian g = random_model({5, 7}, 2, true, 42);
  const GridMap x = random_map(g.shape(), 7);
  const GridMap composed =
      apply({g.chol, Direction::lower}, apply({g.chol, Direction::lower_transpose}, x));
  const GridMap direct = apply({g.chol, Direction::precision}, x);
  CHECK(rel_err_inf(direct, composed) < 1e-15);
}

TEST_CASE("apply rejects shape mismatch") {
  const CholeskyMaps maps = CholeskyMaps::identity({3, 3});
  GridMap x({3, 4});
  CHECK_THROWS_AS(apply({maps, Direction::lower}, x), std::invalid_argument);
}

TEST_CASE("triangular solves") {
  SUBCASE("identity maps solve to the rhs") {
    const CholeskyMaps maps = CholeskyMaps::identity({2, 2});
    const GridMap b = random_map(maps.shape, 5);
    const GridMap s = solve_triangular({maps, Direction::lower}, b);
    for (int i = 0; i < b.size(); ++i) CHECK(s[i] == b[i]);
  }

  SUBCASE("1x2 case inverts the earlier product") {
    CholeskyMaps maps = CholeskyMaps::identity({1, 2});
    maps.off_diag[3].values = {0.0, 0.5};
    GridMap b(maps.shape);
    b.values = {1.5, 1.0};
    const GridMap s = solve_triangular({maps, Direction::lower_transpose}, b);
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("round trip on random 8x8 models") {
    for (uint64_t seed : {10u, 11u, 12u}) {
      const StructuredGaussian g = random_model({8, 8}, 1 + static_cast<int>(seed % 2),
                                                seed % 2 == 0, seed);
      const GridMap b = random_map(g.shape(), seed + 1);
      for (Direction dir : {Direction::lower, Direction::lower_transpose}) {
        const GridMap s = solve_triangular({g.chol, dir}, b);
        const GridMap back = apply({g.chol, dir}, s);
        double inf = 0.0;
        for (int i = 0; i < b.size(); ++i) inf = std::max(inf, std::abs(back[i] - b[i]));
        CHECK(inf < 1e-12);
      }
    }
  }

  SUBCASE("non-positive diagonal is a domain error") {
    CholeskyMaps maps = CholeskyMaps::identity({2, 2});
    maps.scaled = false;
    maps.log_diag.values[1] = -std::numeric_limits<double>::infinity();
    GridMap b(maps.shape, 1.0);
    CHECK_THROWS_AS(solve_triangular({maps, Direction::lower}, b), std::domain_error);
  }

  SUBCASE("precision direction is rejected") {
    const CholeskyMaps maps = CholeskyMaps::identity({2, 2});
    GridMap b(maps.shape, 1.0);
    CHECK_THROWS_AS(solve_triangular({maps, Direction::precision}, b), std::invalid_argument);
  }
}

TEST_CASE("jacobi with a diagonal factor is exact after one iteration") {
  CholeskyMaps maps = CholeskyMaps::identity({3, 3});
  maps.log_diag.values.assign(9, std::log(2.0));
  SampleBundle rhs(maps.shape, 2);
  rhs[0] = random_map(maps.shape, 3);
  rhs[1] = random_map(maps.shape, 4);
  const SampleBundle s = jacobi_solve_Lt(maps, rhs, 1);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 9; ++i) CHECK(s[k][i] == doctest::Approx(rhs[k][i] / 2.0).epsilon(1e-15));
}

TEST_CASE("jacobi equals exact back-substitution once iterations reach N") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const StructuredGaussian g = random_model({8, 8}, 1 + static_cast<int>(seed % 2),
                                              seed % 2 == 1, seed);
    const GridMap e = random_map(g.shape(), seed + 55);
    const GridMap exact = solve_triangular({g.chol, Direction::lower_transpose}, e);
    const GridMap approx = jacobi_solve_Lt(g.chol, e, 64);
    CHECK(rel_err_inf(approx, exact) < 1e-10);

    const GridMap exact_l = solve_triangular({g.chol, Direction::lower}, e);
    const GridMap approx_l = jacobi_solve_L(g.chol, e, 64);
    CHECK(rel_err_inf(approx_l, exact_l) < 1e-10);
  }
}

TEST_CASE("jacobi residual is finite for small J and zero beyond nilpotency") {
  const StructuredGaussian g = random_model({6, 6}, 1, false, 77);
  const GridMap e = random_map(g.shape(), 78);
  double prev = std::numeric_limits<double>::infinity();
  for (int j : {1, 4, 16, 36, 40, 64}) {
    const GridMap s = jacobi_solve_Lt(g.chol, e, j);
    const GridMap back = apply({g.chol, Direction::lower_transpose}, s);
    double res = 0.0;
    for (int i = 0; i < e.size(); ++i) res = std::max(res, std::abs(back[i] - e[i]));
    CHECK(std::isfinite(res));
    if (j >= 36) {  // N = 36: iteration matrix nilpotent, solve exact from here on
      CHECK(res < 1e-10);
      CHECK(res <= prev + 1e-12);
      prev = res;
    }
  }
}

TEST_CASE("jacobi residual threshold stops early on easy systems") {
  CholeskyMaps maps = CholeskyMaps::identity({16, 16});  // diagonal: converges immediately
  const GridMap e = random_map(maps.shape, 9);
  const GridMap s = jacobi_solve_Lt(maps, e, 1000000, 1e-12);
  for (int i = 0; i < e.size(); ++i) CHECK(s[i] == doctest::Approx(e[i]).epsilon(1e-12));
}

TEST_CASE("batched jacobi equals per-sample jacobi") {
  const StructuredGaussian g = random_model({5, 5}, 1, false, 3);
  SampleBundle rhs(g.shape(), 3);
  for (int s = 0; s < 3; ++s) rhs[s] = random_map(g.shape(), 200 + static_cast<uint64_t>(s));
  const SampleBundle batched = jacobi_solve_Lt(g.chol, rhs, 30);
  for (int s = 0; s < 3; ++s) {
    const GridMap single = jacobi_solve_Lt(g.chol, rhs[s], 30);
    for (int i = 0; i < single.size(); ++i) CHECK(batched[s][i] == single[i]);
  }
}

TEST_CASE("default jacobi iteration count is 1000") {
  CHECK(kDefaultJacobiIterations == 1000);
}

TEST_CASE("jacobi rejects invalid iteration counts") {
  const CholeskyMaps maps = CholeskyMaps::identity({2, 2});
  GridMap e(maps.shape, 1.0);
  CHECK_THROWS_AS(jacobi_solve_Lt(maps, e, 0), std::invalid_argument);
}
