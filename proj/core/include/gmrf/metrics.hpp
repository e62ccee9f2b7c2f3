#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmrf/grid.hpp"

namespace gmrf {

/// One prediction/ground-truth pair with a per-pixel uncertainty score
/// (higher = less confident) and an optional validity mask.
struct EvalPair {
  GridMap prediction;
  GridMap ground_truth;
  GridMap uncertainty;
  std::vector<uint8_t> valid;  // empty means all pixels valid

  bool is_valid(int n) const { return valid.empty() || valid[static_cast<size_t>(n)] != 0; }
};

struct DepthMetrics {
  double absrel = 0.0;
  double rmse = 0.0;
  double a1 = 0.0;
};

/// absrel = mean(|p-g|/g), rmse = sqrt(mean((p-g)^2)),
/// a1 = fraction with max(p/g, g/p) < 1.25, over valid pixels.
/// Ground truth must be strictly positive on valid pixels.
DepthMetrics depth_metrics(const EvalPair& pair);

enum class MetricKind { absrel, rmse, a1 };

/// Sparsification analysis. Pixels are removed in decreasing-uncertainty
/// order in the given fraction steps and the metric recomputed on the
/// remainder; curves are expressed in error form (A1 enters as 1 - A1) so
/// lower is always better. Ties break by raster index.
///   AUSE: area between the uncertainty-ordered curve and the oracle curve
///         (pixels removed by true per-pixel error).
///   AURG: area between the random-removal baseline (constant at the
///         full-set metric in expectation) and the uncertainty curve.
struct SparsificationResult {
  std::vector<double> fractions;
  std::vector<double> curve_uncertainty;
  std::vector<double> curve_oracle;
  double random_baseline = 0.0;
  double ause = 0.0;
  double aurg = 0.0;
};

/// 50 equal steps spanning [0, 0.99].
std::vector<double> default_fraction_grid();

SparsificationResult sparsification_curves(const EvalPair& pair, MetricKind metric,
                                           std::span<const double> fractions);

/// Per-pixel sample standard deviation (unbiased, divisor S-1). Needs S >= 2.
GridMap per_pixel_uncertainty_from_samples(const SampleBundle& bundle);

}  // namespace gmrf
