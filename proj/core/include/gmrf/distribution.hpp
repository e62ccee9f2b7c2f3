#pragma once

#include <cstdint>

#include "gmrf/grid.hpp"
#include "gmrf/linops.hpp"

namespace gmrf {

/// Multivariate Gaussian over the grid, parameterized by its mean map and
/// the sparse Cholesky factor of the precision matrix, so the covariance is
/// Sigma = L^{-T} L^{-1} implicitly.
struct StructuredGaussian {
  GridMap mean;
  CholeskyMaps chol;

  StructuredGaussian() = default;
  StructuredGaussian(GridMap m, CholeskyMaps c) : mean(std::move(m)), chol(std::move(c)) {
    if (mean.shape != chol.shape)
      throw std::invalid_argument("StructuredGaussian: mean/chol shape mismatch");
  }

  GridShape shape() const { return chol.shape; }
};

/// Elementwise output activation mapping logit-space samples to the
/// observation space.
struct Activation {
  enum class Kind { identity, scaled_sigmoid };
  Kind kind = Kind::identity;
  double min = 0.0;
  double max = 1.0;

  static Activation identity() { return {}; }
  static Activation scaled_sigmoid(double min, double max) {
    if (!(min < max)) throw std::invalid_argument("Activation: requires min < max");
    return {Kind::scaled_sigmoid, min, max};
  }

  double operator()(double v) const;
};

/// Exact log density: -(N/2) ln(2 pi) + sum_n ln(diag_n) - 1/2 ||L^T (d - mu)||^2.
double log_density(const StructuredGaussian& g, const GridMap& d);

/// Sum of log_density over every map in the bundle.
double log_density_bundle(const StructuredGaussian& g, const SampleBundle& bundle);

/// count samples mu + L^{-T} E with E i.i.d. standard normal, solved by
/// truncated Jacobi iteration. Deterministic given seed.
SampleBundle sample(const StructuredGaussian& g, int count, uint64_t seed,
                    int jacobi_iterations = kDefaultJacobiIterations);

/// Row k of the covariance matrix as a grid map: Sigma e_k, computed by the
/// L-solve followed by the L^T-solve, no mean added. jacobi_iterations == 0
/// uses exact triangular solves; > 0 mirrors the sampling process with the
/// truncated Jacobi solver.
GridMap covariance_row(const StructuredGaussian& g, int pixel, int jacobi_iterations = 0);

/// Rendering transform for covariance rows: signed square root elementwise,
/// clipped to [-clip, clip].
GridMap visualize_covariance_row(const GridMap& row, double clip = 0.05);

GridMap apply_activation(const GridMap& map, const Activation& act);
SampleBundle apply_activation(const SampleBundle& bundle, const Activation& act);

}  // namespace gmrf
