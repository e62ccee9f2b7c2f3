#include "gmrf/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmrf/random.hpp"

namespace gmrf {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
}

double Activation::operator()(double v) const {
  switch (kind) {
    case Kind::identity:
      return v;
    case Kind::scaled_sigmoid:
      return min + (max - min) / (1.0 + std::exp(-v));
  }
  return v;
}

double log_density(const StructuredGaussian& g, const GridMap& d) {
  if (d.shape != g.shape()) throw std::invalid_argument("log_density: shape mismatch");
  if (!d.all_finite()) throw std::invalid_argument("log_density: non-finite input map");
  const int n = g.shape().pixels();

  GridMap residual(g.shape());
  for (int i = 0; i < n; ++i) residual[i] = d[i] - g.mean[i];
  const GridMap t = apply({g.chol, Direction::lower_transpose}, residual);

  const GridMap log_diag = log_effective_diagonal(g.chol);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += log_diag[i];

  double quad = 0.0;
  for (int i = 0; i < n; ++i) quad += t[i] * t[i];

  return -0.5 * n * kLogTwoPi + log_det - 0.5 * quad;
}

double log_density_bundle(const StructuredGaussian& g, const SampleBundle& bundle) {
  if (bundle.shape != g.shape()) throw std::invalid_argument("log_density_bundle: shape mismatch");
  double total = 0.0;
  for (int s = 0; s < bundle.count(); ++s) total += log_density(g, bundle[s]);
  return total;
}

SampleBundle sample(const StructuredGaussian& g, int count, uint64_t seed, int jacobi_iterations) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  SampleBundle noise = normal_bundle(g.shape(), count, seed);
  SampleBundle out = jacobi_solve_Lt(g.chol, noise, jacobi_iterations);
  const int n = g.shape().pixels();
  for (int s = 0; s < count; ++s)
    for (int i = 0; i < n; ++i) out[s][i] += g.mean[i];
  return out;
}

GridMap covariance_row(const StructuredGaussian& g, int pixel, int jacobi_iterations) {
  const int n = g.shape().pixels();
  if (pixel < 0 || pixel >= n) throw std::invalid_argument("covariance_row: pixel out of range");
  GridMap one_hot(g.shape());
  one_hot[pixel] = 1.0;
  if (jacobi_iterations > 0) {
    GridMap y = jacobi_solve_L(g.chol, one_hot, jacobi_iterations);
    return jacobi_solve_Lt(g.chol, y, jacobi_iterations);
  }
  GridMap y = solve_triangular({g.chol, Direction::lower}, one_hot);
  return solve_triangular({g.chol, Direction::lower_transpose}, y);
}

GridMap visualize_covariance_row(const GridMap& row, double clip) {
  GridMap out(row.shape);
  for (int i = 0; i < row.size(); ++i) {
    const double v = row[i];
    const double signed_sqrt = v >= 0.0 ? std::sqrt(v) : -std::sqrt(-v);
    out[i] = std::clamp(signed_sqrt, -clip, clip);
  }
  return out;
}

GridMap apply_activation(const GridMap& map, const Activation& act) {
  GridMap out(map.shape);
  for (int i = 0; i < map.size(); ++i) out[i] = act(map[i]);
  return out;
}

SampleBundle apply_activation(const SampleBundle& bundle, const Activation& act) {
  SampleBundle out(bundle.shape, bundle.count());
  for (int s = 0; s < bundle.count(); ++s) out[s] = apply_activation(bundle[s], act);
  return out;
}

}  // namespace gmrf
