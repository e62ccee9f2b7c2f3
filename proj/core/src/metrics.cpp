#include "gmrf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gmrf {

namespace {

struct ValidPixels {
  std::vector<double> prediction;
  std::vector<double> ground_truth;
  std::vector<double> uncertainty;
};

ValidPixels collect_valid(const EvalPair& pair, bool need_positive_gt) {
  if (pair.prediction.shape != pair.ground_truth.shape ||
      pair.prediction.shape != pair.uncertainty.shape)
    throw std::invalid_argument("metrics: map shape mismatch");
  if (!pair.valid.empty() &&
      static_cast<int>(pair.valid.size()) != pair.prediction.shape.pixels())
    throw std::invalid_argument("metrics: valid mask size mismatch");

  ValidPixels out;
  for (int i = 0; i < pair.prediction.size(); ++i) {
    if (!pair.is_valid(i)) continue;
    if (need_positive_gt && !(pair.ground_truth[i] > 0.0))
      throw std::invalid_argument("metrics: non-positive ground truth on a valid pixel");
    out.prediction.push_back(pair.prediction[i]);
    out.ground_truth.push_back(pair.ground_truth[i]);
    out.uncertainty.push_back(pair.uncertainty[i]);
  }
  if (out.prediction.empty()) throw std::invalid_argument("metrics: no valid pixels");
  return out;
}

// Per-pixel error contribution for each metric, and the aggregate over an
// index subset. A1 is reported in error form (1 - a1) inside the curves.
double pixel_error(MetricKind kind, double p, double g) {
  switch (kind) {
    case MetricKind::absrel:
      return std::abs(p - g) / g;
    case MetricKind::rmse:
      return (p - g) * (p - g);
    case MetricKind::a1:
      return std::max(p / g, g / p) < 1.25 ? 0.0 : 1.0;
  }
  return 0.0;
}

double aggregate(MetricKind kind, const std::vector<double>& errors,
                 std::span<const int> subset) {
  double sum = 0.0;
  for (int idx : subset) sum += errors[static_cast<size_t>(idx)];
  const double mean = sum / static_cast<double>(subset.size());
  return kind == MetricKind::rmse ? std::sqrt(mean) : mean;
}

double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  double area = 0.0;
  for (size_t i = 1; i < xs.size(); ++i)
    area += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return area;
}

}  // namespace

DepthMetrics depth_metrics(const EvalPair& pair) {
  const ValidPixels px = collect_valid(pair, true);
  const size_t m = px.prediction.size();

  DepthMetrics out;
  double sq_sum = 0.0;
  int a1_hits = 0;
  for (size_t i = 0; i < m; ++i) {
    const double p = px.prediction[i], g = px.ground_truth[i];
    out.absrel += std::abs(p - g) / g;
    sq_sum += (p - g) * (p - g);
    a1_hits += std::max(p / g, g / p) < 1.25 ? 1 : 0;
  }
  out.absrel /= static_cast<double>(m);
  out.rmse = std::sqrt(sq_sum / static_cast<double>(m));
  out.a1 = static_cast<double>(a1_hits) / static_cast<double>(m);
  return out;
}

std::vector<double> default_fraction_grid() {
  std::vector<double> fractions(50);
  for (size_t i = 0; i < fractions.size(); ++i)
    fractions[i] = 0.99 * static_cast<double>(i) / static_cast<double>(fractions.size() - 1);
  return fractions;
}

SparsificationResult sparsification_curves(const EvalPair& pair, MetricKind metric,
                                           std::span<const double> fractions) {
  if (fractions.size() < 2)
    throw std::invalid_argument("sparsification_curves: need at least 2 fraction steps");
  for (size_t i = 1; i < fractions.size(); ++i)
    if (!(fractions[i] > fractions[i - 1]) || fractions[i] >= 1.0 || fractions[0] < 0.0)
      throw std::invalid_argument("sparsification_curves: fractions must increase within [0, 1)");

  const ValidPixels px = collect_valid(pair, true);
  for (double u : px.uncertainty)
    if (!std::isfinite(u))
      throw std::invalid_argument("sparsification_curves: non-finite uncertainty");

  const int m = static_cast<int>(px.prediction.size());
  std::vector<double> errors(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    errors[static_cast<size_t>(i)] = pixel_error(metric, px.prediction[static_cast<size_t>(i)],
                                                 px.ground_truth[static_cast<size_t>(i)]);

  // Removal orders: highest key first, raster index breaking ties.
  auto removal_order = [m](const std::vector<double>& key) {
    std::vector<int> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&key](int a, int b) {
      return key[static_cast<size_t>(a)] > key[static_cast<size_t>(b)];
    });
    return order;
  };
  const std::vector<int> by_uncertainty = removal_order(px.uncertainty);
  const std::vector<int> by_error = removal_order(errors);

  auto curve = [&](const std::vector<int>& order) {
    std::vector<double> values;
    values.reserve(fractions.size());
    for (double f : fractions) {
      const int removed = std::min(m - 1, static_cast<int>(f * m));
      values.push_back(
          aggregate(metric, errors, std::span<const int>(order).subspan(static_cast<size_t>(removed))));
    }
    return values;
  };

  SparsificationResult out;
  out.fractions.assign(fractions.begin(), fractions.end());
  out.curve_uncertainty = curve(by_uncertainty);
  out.curve_oracle = curve(by_error);
  std::vector<int> all(static_cast<size_t>(m));
  std::iota(all.begin(), all.end(), 0);
  out.random_baseline = aggregate(metric, errors, all);

  std::vector<double> diff(fractions.size());
  for (size_t i = 0; i < fractions.size(); ++i)
    diff[i] = out.curve_uncertainty[i] - out.curve_oracle[i];
  out.ause = trapezoid(out.fractions, diff);
  for (size_t i = 0; i < fractions.size(); ++i)
    diff[i] = out.random_baseline - out.curve_uncertainty[i];
  out.aurg = trapezoid(out.fractions, diff);
  return out;
}

GridMap per_pixel_uncertainty_from_samples(const SampleBundle& bundle) {
  const int s = bundle.count();
  if (s < 2)
    throw std::invalid_argument("per_pixel_uncertainty_from_samples: need at least 2 samples");
  const int n = bundle.shape.pixels();
  GridMap mean(bundle.shape), out(bundle.shape);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < n; ++j) mean[j] += bundle[i][j];
  for (double& v : mean.values) v /= s;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = bundle[i][j] - mean[j];
      out[j] += d * d;
    }
  for (double& v : out.values) v = std::sqrt(v / (s - 1));
  return out;
}

}  // namespace gmrf
