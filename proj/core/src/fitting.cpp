#include "gmrf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmrf/errors.hpp"
#include "gmrf/linops.hpp"
#include "gmrf/random.hpp"

namespace gmrf {

double nll(const StructuredGaussian& g, const SampleBundle& bundle) {
  return -log_density_bundle(g, bundle);
}

NllGradients nll_gradients(const StructuredGaussian& g, const SampleBundle& bundle) {
  if (bundle.shape != g.shape()) throw std::invalid_argument("nll_gradients: shape mismatch");
  const GridShape shape = g.shape();
  const int n = shape.pixels();
  const int h = shape.height, w = shape.width;
  const int num_samples = bundle.count();
  const std::vector<Offset>& offsets = g.chol.pattern.offsets();
  const int num_offsets = static_cast<int>(offsets.size());

  const GridMap diag = effective_diagonal(g.chol);
  const LinearOperatorView lt{g.chol, Direction::lower_transpose};
  const LinearOperatorView lo{g.chol, Direction::lower};

  NllGradients grad;
  grad.d_mean = GridMap(shape);
  grad.d_log_diag = GridMap(shape);
  grad.d_off_diag.assign(static_cast<size_t>(num_offsets), GridMap(shape));
  grad.d_off_diag_scale_c.assign(static_cast<size_t>(num_offsets), 0.0);

  // Accumulate d NLL / d L_)entries in effective-value space first:
  //   quadratic term: sum_s r_s t_s^T restricted to the pattern, t_s = L^T r_s
  //   log-det term:   -S / diag_n on the diagonal
  GridMap diag_entry_grad(shape);
  std::vector<GridMap> off_entry_grad(static_cast<size_t>(num_offsets), GridMap(shape));

  for (int s = 0; s < num_samples; ++s) {
    GridMap residual(shape);
    for (int i = 0; i < n; ++i) residual[i] = bundle[s][i] - g.mean[i];
    const GridMap t = apply(lt, residual);
    const GridMap lambda_r = apply(lo, t);

    for (int i = 0; i < n; ++i) {
      grad.d_mean[i] -= lambda_r[i];
      diag_entry_grad[i] += residual[i] * t[i];
    }
    for (int l = 0; l < num_offsets; ++l) {
      const Offset o = offsets[l];
      const int stride = o.dy * w + o.dx;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const int ny = y + o.dy, nx = x + o.dx;
          if (ny < 0 || nx < 0 || nx >= w) continue;
          const int k = y * w + x;
          off_entry_grad[static_cast<size_t>(l)][k] += residual[k] * t[k + stride];
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) diag_entry_grad[i] -= num_samples / diag[i];

  // Chain through the parameterization.
  if (g.chol.scaled) {
    const double exp_b = std::exp(g.chol.diag_scale_b);
    for (int i = 0; i < n; ++i) {
      const double exp_phi_a = std::exp(g.chol.log_diag[i] + g.chol.diag_scale_a);
      grad.d_log_diag[i] = diag_entry_grad[i] * exp_phi_a;
      grad.d_diag_scale_a += diag_entry_grad[i] * exp_phi_a;
      grad.d_diag_scale_b += diag_entry_grad[i] * exp_b;
    }
    for (int l = 0; l < num_offsets; ++l) {
      const double c = g.chol.off_diag_scale_c[static_cast<size_t>(l)];
      for (int i = 0; i < n; ++i) {
        const double th = std::tanh(g.chol.off_diag[static_cast<size_t>(l)][i]);
        const double entry = off_entry_grad[static_cast<size_t>(l)][i];
        grad.d_off_diag[static_cast<size_t>(l)][i] = entry * c * (1.0 - th * th);
        grad.d_off_diag_scale_c[static_cast<size_t>(l)] += entry * th;
      }
    }
  } else {
    for (int i = 0; i < n; ++i) grad.d_log_diag[i] = diag_entry_grad[i] * diag[i];
    for (int l = 0; l < num_offsets; ++l)
      grad.d_off_diag[static_cast<size_t>(l)] = off_entry_grad[static_cast<size_t>(l)];
  }
  return grad;
}

namespace {

// Flat views over the trainable parameters; layout fixed by the config.
struct ParameterLayout {
  bool fit_mean;
  bool fit_off_diag;
  bool scaled;
  int n;
  int num_offsets;

  int size() const {
    int total = n;  // log_diag always trained
    if (fit_mean) total += n;
    if (fit_off_diag) total += n * num_offsets;
    if (scaled) total += 2 + num_offsets;
    return total;
  }

  void gather(const StructuredGaussian& g, std::vector<double>& out) const {
    out.clear();
    out.reserve(static_cast<size_t>(size()));
    if (fit_mean) out.insert(out.end(), g.mean.values.begin(), g.mean.values.end());
    out.insert(out.end(), g.chol.log_diag.values.begin(), g.chol.log_diag.values.end());
    if (fit_off_diag)
      for (const GridMap& m : g.chol.off_diag)
        out.insert(out.end(), m.values.begin(), m.values.end());
    if (scaled) {
      out.push_back(g.chol.diag_scale_a);
      out.push_back(g.chol.diag_scale_b);
      out.insert(out.end(), g.chol.off_diag_scale_c.begin(), g.chol.off_diag_scale_c.end());
    }
  }

  void scatter(const std::vector<double>& params, StructuredGaussian& g) const {
    size_t pos = 0;
    if (fit_mean) {
      std::copy_n(params.begin() + pos, n, g.mean.values.begin());
      pos += static_cast<size_t>(n);
    }
    std::copy_n(params.begin() + static_cast<long>(pos), n, g.chol.log_diag.values.begin());
    pos += static_cast<size_t>(n);
    if (fit_off_diag) {
      for (GridMap& m : g.chol.off_diag) {
        std::copy_n(params.begin() + static_cast<long>(pos), n, m.values.begin());
        pos += static_cast<size_t>(n);
      }
    }
    if (scaled) {
      g.chol.diag_scale_a = params[pos++];
      g.chol.diag_scale_b = params[pos++];
      for (double& c : g.chol.off_diag_scale_c) c = params[pos++];
    }
  }

  void gather_gradient(const NllGradients& grad, std::vector<double>& out) const {
    out.clear();
    out.reserve(static_cast<size_t>(size()));
    if (fit_mean) out.insert(out.end(), grad.d_mean.values.begin(), grad.d_mean.values.end());
    out.insert(out.end(), grad.d_log_diag.values.begin(), grad.d_log_diag.values.end());
    if (fit_off_diag)
      for (const GridMap& m : grad.d_off_diag)
        out.insert(out.end(), m.values.begin(), m.values.end());
    if (scaled) {
      out.push_back(grad.d_diag_scale_a);
      out.push_back(grad.d_diag_scale_b);
      out.insert(out.end(), grad.d_off_diag_scale_c.begin(), grad.d_off_diag_scale_c.end());
    }
  }
};

// Clamp the raw diagonal parameters so the implied per-pixel variance
// 1/diag^2 stays at or above the floor. Keeps degenerate (zero-variance)
// bundles from driving the NLL to -inf.
void apply_variance_floor(StructuredGaussian& g, double floor) {
  if (floor <= 0.0) return;
  const double max_diag = 1.0 / std::sqrt(floor);
  if (g.chol.scaled) {
    const double max_b = std::log(0.5 * max_diag);
    g.chol.diag_scale_b = std::min(g.chol.diag_scale_b, max_b);
    const double headroom = max_diag - std::exp(g.chol.diag_scale_b);
    const double max_phi = std::log(headroom) - g.chol.diag_scale_a;
    for (double& phi : g.chol.log_diag.values) phi = std::min(phi, max_phi);
  } else {
    const double max_phi = std::log(max_diag);
    for (double& phi : g.chol.log_diag.values) phi = std::min(phi, max_phi);
  }
}

GridMap bundle_mean(const SampleBundle& bundle) {
  GridMap mean(bundle.shape);
  for (int s = 0; s < bundle.count(); ++s)
    for (int i = 0; i < mean.size(); ++i) mean[i] += bundle[s][i];
  for (double& v : mean.values) v /= bundle.count();
  return mean;
}

}  // namespace

std::pair<StructuredGaussian, FitReport> fit(const SampleBundle& bundle,
                                             const SparsityPattern& pattern,
                                             const FitConfig& config, uint64_t seed) {
  bundle.validate();
  if (config.learning_rate <= 0.0) throw std::invalid_argument("fit: learning_rate must be > 0");
  if (config.convergence_tol <= 0.0) throw std::invalid_argument("fit: convergence_tol must be > 0");
  if (config.max_iterations < 1) throw std::invalid_argument("fit: max_iterations must be >= 1");
  if (bundle.count() < 2 && config.variance_floor <= 0.0)
    throw std::invalid_argument("fit: need at least 2 samples unless the variance floor is enabled");

  const GridShape shape = bundle.shape;

  // Initialization. The mean starts at the bundle mean (the exact ML mean
  // for any Lambda); phi at 0; psi at 0 or small uniform values.
  CholeskyMaps maps(shape, pattern);
  maps.scaled = config.scaled_parameterization;
  if (maps.scaled) {
    maps.diag_scale_b = -4.0;
    std::fill(maps.off_diag_scale_c.begin(), maps.off_diag_scale_c.end(), std::exp(-4.0));
  }
  if (config.init == FitInit::small_offdiag && !config.diagonal_only) {
    NormalSampler rng(seed);
    const double magnitude = std::exp(-4.0);
    for (GridMap& m : maps.off_diag)
      for (double& v : m.values) v = (2.0 * rng.next_uniform_open() - 1.0) * magnitude;
  }
  StructuredGaussian model(bundle_mean(bundle), std::move(maps));
  apply_variance_floor(model, config.variance_floor);

  const ParameterLayout layout{config.fit_mean, !config.diagonal_only,
                               config.scaled_parameterization, shape.pixels(), pattern.size()};

  std::vector<double> params;
  layout.gather(model, params);
  const size_t dim = params.size();

  // Adam state
  std::vector<double> m(dim, 0.0), v(dim, 0.0), grad_flat(dim, 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  FitReport report;
  report.nll_trace.reserve(static_cast<size_t>(config.max_iterations));

  double best_nll = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = params;

  // Converged once the best NLL has not improved by a relative
  // convergence_tol margin for kPatience consecutive iterations.
  constexpr int kPatience = 100;
  int last_significant_improvement = 0;

  for (int it = 0; it < config.max_iterations; ++it) {
    layout.scatter(params, model);
    const double objective = nll(model, bundle);
    if (!std::isfinite(objective)) {
      report.nll_trace.push_back(objective);
      throw FitDivergedError("fit: NLL became non-finite at iteration " + std::to_string(it),
                             report.nll_trace);
    }
    report.nll_trace.push_back(objective);
    report.iterations_used = it + 1;
    if (objective < best_nll) {
      if (objective < best_nll - config.convergence_tol * std::max(1.0, std::abs(best_nll)))
        last_significant_improvement = it;
      best_nll = objective;
      best_params = params;
    }
    if (it - last_significant_improvement >= kPatience) break;

    const NllGradients grad = nll_gradients(model, bundle);
    layout.gather_gradient(grad, grad_flat);

    double grad_norm2 = 0.0;
    for (double gv : grad_flat) grad_norm2 += gv * gv;
    report.gradient_norm = std::sqrt(grad_norm2);

    const double bias1 = 1.0 - std::pow(beta1, it + 1);
    const double bias2 = 1.0 - std::pow(beta2, it + 1);
    for (size_t i = 0; i < dim; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad_flat[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad_flat[i] * grad_flat[i];
      params[i] -= config.learning_rate * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + eps);
    }
    layout.scatter(params, model);
    apply_variance_floor(model, config.variance_floor);
    layout.gather(model, params);
  }

  layout.scatter(best_params, model);
  report.final_nll = best_nll;
  // The trace records every visited iterate and closes with the NLL of the
  // returned (best-seen) parameters, so final_nll always equals the last entry.
  report.nll_trace.push_back(best_nll);
  return {std::move(model), std::move(report)};
}

}  // namespace gmrf
