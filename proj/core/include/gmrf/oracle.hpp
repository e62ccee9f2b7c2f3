#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmrf/conditioning.hpp"
#include "gmrf/distribution.hpp"
#include "gmrf/grid.hpp"

namespace gmrf {

/// Dense-oracle size guard: grids above this pixel count are refused.
inline constexpr int kDenseCapacity = 4096;

/// Explicit dense form of a StructuredGaussian; the brute-force reference
/// every sparse-path operation is checked against. O(N^3), test-scale only.
struct DenseGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cholesky_precision;  // L, lower triangular
  Eigen::MatrixXd precision;           // L L^T
  Eigen::MatrixXd covariance;          // (L L^T)^{-1}
  GridShape shape;
};

/// Materializes L with boundary zeros, then Lambda and Sigma by dense
/// inversion. Throws CapacityError above kDenseCapacity pixels.
DenseGaussian assemble_dense(const StructuredGaussian& g);

/// Dense L alone (no inversion); same capacity guard.
Eigen::MatrixXd dense_lower_factor(const CholeskyMaps& maps);

double dense_log_density(const DenseGaussian& d, const GridMap& x);

/// mu + chol(Sigma) eps with eps drawn from the shared NormalSampler stream,
/// so a seed-matched sparse sample sees the same noise.
SampleBundle dense_sample(const DenseGaussian& d, int count, uint64_t seed);

/// Textbook conditional (b, B) from the covariance-block formulas.
struct DenseConditional {
  std::vector<int> unknown_index;
  Eigen::VectorXd mean_unknown;       // b
  Eigen::MatrixXd covariance_unknown; // B
  GridMap full_mean;                  // alpha on knowns, b on unknowns
};
DenseConditional dense_conditional(const DenseGaussian& d, const Conditioning& cond);

/// Randomized sparse-vs-dense equivalence checks (log density, precision
/// apply, covariance rows, conditional means, the Matheron precision-form
/// identity). One seeded instance per seed value; empty result means all
/// checks passed at the given tolerance.
struct CrossCheckOptions {
  int seeds = 50;
  GridShape min_size{4, 4};
  GridShape max_size{8, 8};
  double tolerance = 1e-8;
};

struct CrossCheckFailure {
  uint64_t seed;
  std::string check;
  double error;
};

std::vector<CrossCheckFailure> run_cross_checks(const CrossCheckOptions& options);

/// Deterministic random model used by cross checks and tests: radius 1 or 2,
/// scaled or unscaled parameterization, moderate parameter magnitudes.
StructuredGaussian random_model(GridShape shape, int radius, bool scaled, uint64_t seed);

}  // namespace gmrf
