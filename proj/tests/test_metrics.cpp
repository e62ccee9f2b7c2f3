#include <doctest.h>

#include <cmath>

#include "gmrf/metrics.hpp"
#include "gmrf/random.hpp"

using namespace gmrf;

namespace {

EvalPair make_pair(GridShape shape, uint64_t seed) {
  NormalSampler rng(seed);
  EvalPair pair;
  pair.ground_truth = GridMap(shape);
  pair.prediction = GridMap(shape);
  pair.uncertainty = GridMap(shape);
  for (int i = 0; i < shape.pixels(); ++i) {
    pair.ground_truth[i] = 2.0 + rng.next_uniform_open() * 8.0;   // positive depths
    pair.prediction[i] = pair.ground_truth[i] + 0.5 * rng.next();  // noisy prediction
    pair.uncertainty[i] = rng.next_uniform_open();
  }
  return pair;
}

}  // namespace

TEST_CASE("depth metrics formula spot checks") {
  GridShape shape(2, 2);
  EvalPair pair;
  pair.ground_truth = GridMap(shape, 5.0);
  pair.uncertainty = GridMap(shape, 1.0);

  SUBCASE("perfect prediction") {
    pair.prediction = pair.ground_truth;
    const DepthMetrics m = depth_metrics(pair);
    CHECK(m.absrel == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.a1 == 1.0);
  }

  SUBCASE("uniform 20% overestimate stays inside the A1 ratio") {
    pair.prediction = GridMap(shape);
    for (int i = 0; i < 4; ++i) pair.prediction[i] = 1.2 * pair.ground_truth[i];
    const DepthMetrics m = depth_metrics(pair);
    CHECK(m.absrel == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(m.a1 == 1.0);  // 1.2 < 1.25
    CHECK(m.rmse == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("doubling fails A1 everywhere") {
    pair.prediction = GridMap(shape);
    for (int i = 0; i < 4; ++i) pair.prediction[i] = 2.0 * pair.ground_truth[i];
    CHECK(depth_metrics(pair).a1 == 0.0);
  }

  SUBCASE("zero ground truth on a valid pixel is rejected") {
    pair.prediction = pair.ground_truth;
    pair.ground_truth[2] = 0.0;
    CHECK_THROWS_AS(depth_metrics(pair), std::invalid_argument);
  }

  SUBCASE("masked-out pixels cannot influence the metrics") {
    pair.prediction = pair.ground_truth;
    pair.valid = {1, 1, 0, 1};
    pair.prediction[2] = 1e9;
    pair.ground_truth[2] = -5.0;  // invalid value hidden by the mask
    const DepthMetrics m = depth_metrics(pair);
    CHECK(m.absrel == 0.0);
    CHECK(m.a1 == 1.0);
  }
}

TEST_CASE("default fraction grid spans [0, 0.99] in 50 steps") {
  const std::vector<double> f = default_fraction_grid();
  REQUIRE(f.size() == 50);
  CHECK(f.front() == 0.0);
  CHECK(f.back() == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("oracle-identical uncertainty gives AUSE exactly zero") {
  EvalPair pair = make_pair({8, 8}, 31);
  const std::vector<double> fractions = default_fraction_grid();

  for (MetricKind kind : {MetricKind::absrel, MetricKind::rmse, MetricKind::a1}) {
    // uncertainty = the oracle's own per-pixel error for this metric
    for (int i = 0; i < 64; ++i) {
      const double p = pair.prediction[i], g = pair.ground_truth[i];
      switch (kind) {
        case MetricKind::absrel:
          pair.uncertainty[i] = std::abs(p - g) / g;
          break;
        case MetricKind::rmse:
          pair.uncertainty[i] = std::abs(p - g);
          break;
        case MetricKind::a1:
          pair.uncertainty[i] = std::max(p / g, g / p) < 1.25 ? 0.0 : 1.0;
          break;
      }
    }
    const SparsificationResult r = sparsification_curves(pair, kind, fractions);
    CHECK(r.ause == 0.0);
    CHECK(r.aurg >= 0.0);
  }
}

TEST_CASE("AUSE is invariant under monotone transforms of the uncertainty") {
  EvalPair pair = make_pair({8, 8}, 37);
  const std::vector<double> fractions = default_fraction_grid();
  const SparsificationResult base = sparsification_curves(pair, MetricKind::rmse, fractions);

  for (double& u : pair.uncertainty.values) u = std::exp(u);
  const SparsificationResult mapped = sparsification_curves(pair, MetricKind::rmse, fractions);
  CHECK(mapped.ause == doctest::Approx(base.ause).epsilon(1e-14));
  CHECK(mapped.aurg == doctest::Approx(base.aurg).epsilon(1e-14));
}

TEST_CASE("constant uncertainty behaves like the random baseline") {
  EvalPair pair = make_pair({32, 32}, 41);
  for (double& u : pair.uncertainty.values) u = 0.75;
  const SparsificationResult r =
      sparsification_curves(pair, MetricKind::rmse, default_fraction_grid());
  // ties resolve to raster order, which is uninformative for i.i.d. errors
  CHECK(std::abs(r.aurg) < 0.1 * r.random_baseline);
}

TEST_CASE("reversed oracle ranking maximizes AUSE among the tested rankings") {
  EvalPair pair = make_pair({8, 8}, 43);
  const std::vector<double> fractions = default_fraction_grid();

  std::vector<double> oracle_error(64);
  for (int i = 0; i < 64; ++i)
    oracle_error[static_cast<size_t>(i)] = std::abs(pair.prediction[i] - pair.ground_truth[i]);

  auto ause_for = [&](auto assign) {
    for (int i = 0; i < 64; ++i) pair.uncertainty[i] = assign(i);
    return sparsification_curves(pair, MetricKind::rmse, fractions).ause;
  };
  const double ause_oracle = ause_for([&](int i) { return oracle_error[static_cast<size_t>(i)]; });
  const double ause_const = ause_for([&](int) { return 1.0; });
  const double ause_reversed =
      ause_for([&](int i) { return -oracle_error[static_cast<size_t>(i)]; });

  CHECK(ause_reversed > ause_const);
  CHECK(ause_reversed > ause_oracle);
  CHECK(ause_oracle == 0.0);
}

TEST_CASE("oracle RMSE curve is monotonically non-increasing without ties") {
  const EvalPair pair = make_pair({10, 10}, 47);  // continuous seeded data: no ties
  const SparsificationResult r =
      sparsification_curves(pair, MetricKind::rmse, default_fraction_grid());
  for (size_t i = 1; i < r.curve_oracle.size(); ++i)
    CHECK(r.curve_oracle[i] <= r.curve_oracle[i - 1] + 1e-14);
}

TEST_CASE("sparsification rejects degenerate fraction grids") {
  const EvalPair pair = make_pair({4, 4}, 53);
  const std::vector<double> single = {0.0};
  CHECK_THROWS_AS(sparsification_curves(pair, MetricKind::rmse, single), std::invalid_argument);
  const std::vector<double> beyond = {0.0, 1.0};
  CHECK_THROWS_AS(sparsification_curves(pair, MetricKind::rmse, beyond), std::invalid_argument);
}

TEST_CASE("per-pixel sample standard deviation") {
  SUBCASE("identical samples give a zero map") {
    SampleBundle b({2, 2}, 3);
    for (int s = 0; s < 3; ++s) b[s] = GridMap({2, 2}, 4.2);
    for (double v : per_pixel_uncertainty_from_samples(b).values) CHECK(v == 0.0);
  }

  SUBCASE("two symmetric samples give |v| * sqrt(2)") {
    SampleBundle b({1, 2}, 2);
    b[0].values = {0.3, -1.2};
    b[1].values = {-0.3, 1.2};
    const GridMap sd = per_pixel_uncertainty_from_samples(b);
    CHECK(sd[0] == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sd[1] == doctest::Approx(1.2 * std::sqrt(2.0)).epsilon(1e-12));
  }

  SUBCASE("standard normal samples give a map near one") {
    const SampleBundle b = normal_bundle({3, 3}, 10000, 59);
    for (double v : per_pixel_uncertainty_from_samples(b).values)
      CHECK(std::abs(v - 1.0) < 0.03);
  }

  SUBCASE("a single sample is rejected") {
    SampleBundle b({2, 2}, 1);
    CHECK_THROWS_AS(per_pixel_uncertainty_from_samples(b), std::invalid_argument);
  }
}
