#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gmrf/distribution.hpp"
#include "gmrf/grid.hpp"

namespace gmrf {

enum class FitInit {
  identity,       // phi = 0, psi = 0
  small_offdiag,  // phi = 0, psi uniform in +/- exp(-4)
};

struct FitConfig {
  int max_iterations = 5000;
  double learning_rate = 1e-2;   // direct parameter-map fitting wants larger steps than CNN weights
  double convergence_tol = 1e-9; // relative NLL change over the trailing window
  FitInit init = FitInit::small_offdiag;
  bool scaled_parameterization = false;
  bool fit_mean = true;
  bool diagonal_only = false;
  double variance_floor = 1e-6;  // floor on the implied per-pixel variance 1/diag^2; 0 disables
};

struct FitReport {
  double final_nll = 0.0;
  std::vector<double> nll_trace;
  int iterations_used = 0;
  double gradient_norm = 0.0;
};

/// Negative log likelihood of the bundle under the model, -log_density_bundle.
double nll(const StructuredGaussian& g, const SampleBundle& bundle);

/// Analytic gradients of nll with respect to every raw parameter. Structure
/// matches CholeskyMaps; scale gradients are zero when the model is unscaled.
struct NllGradients {
  GridMap d_mean;
  GridMap d_log_diag;
  std::vector<GridMap> d_off_diag;
  double d_diag_scale_a = 0.0;
  double d_diag_scale_b = 0.0;
  std::vector<double> d_off_diag_scale_c;
};
NllGradients nll_gradients(const StructuredGaussian& g, const SampleBundle& bundle);

/// Maximum-likelihood fit of a StructuredGaussian to the bundle by Adam on
/// the exact NLL gradients. Returns the parameters at the best NLL seen.
/// Throws FitDivergedError (with the trace) if the objective goes non-finite.
std::pair<StructuredGaussian, FitReport> fit(const SampleBundle& bundle,
                                             const SparsityPattern& pattern,
                                             const FitConfig& config, uint64_t seed);

}  // namespace gmrf
