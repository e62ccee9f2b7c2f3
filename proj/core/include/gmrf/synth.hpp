#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "gmrf/distribution.hpp"
#include "gmrf/grid.hpp"

namespace gmrf {

/// Sample bundle drawn exactly from a seeded random StructuredGaussian; the
/// generating model is returned for recovery experiments.
struct GroundTruthGmrfParams {
  int radius = 1;
  double mean_amplitude = 1.0;
  double log_diag_spread = 0.3;
  double off_diag_magnitude = 0.3;
  bool scaled = false;
};

/// Spatially correlated maps built from seeded smooth bumps plus a small
/// white-noise nugget; no closed-form model exists for these.
struct SmoothFieldParams {
  double length_scale = 2.0;
  double amplitude = 1.0;
  double nugget = 0.02;  // i.i.d. noise std relative to amplitude
};

/// Independent per-pixel noise around a fixed mean map.
struct DiagonalNoiseParams {
  GridMap mean;
  GridMap std_dev;
};

struct SynthSpec {
  GridShape shape;
  int count = 1;
  uint64_t seed = 0;
  std::variant<GroundTruthGmrfParams, SmoothFieldParams, DiagonalNoiseParams> kind;
};

struct SynthResult {
  SampleBundle bundle;
  // Present for ground_truth_gmrf, and for diagonal_noise with strictly
  // positive stds; absent for smooth_field.
  std::optional<StructuredGaussian> ground_truth;
};

/// Deterministic given spec.seed.
SynthResult generate(const SynthSpec& spec);

}  // namespace gmrf
