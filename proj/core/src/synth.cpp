#include "gmrf/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "gmrf/linops.hpp"
#include "gmrf/oracle.hpp"
#include "gmrf/random.hpp"

namespace gmrf {

namespace {

SynthResult generate_gmrf(const SynthSpec& spec, const GroundTruthGmrfParams& p) {
  if (p.log_diag_spread < 0.0 || p.off_diag_magnitude < 0.0 || p.mean_amplitude < 0.0)
    throw std::invalid_argument("synth: gmrf parameter amplitudes must be non-negative");

  NormalSampler rng(spec.seed);
  auto uniform = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.next_uniform_open(); };

  CholeskyMaps maps(spec.shape, canonical_pattern(p.radius));
  maps.scaled = p.scaled;
  for (double& v : maps.log_diag.values) v = uniform(-p.log_diag_spread, p.log_diag_spread);
  for (GridMap& m : maps.off_diag)
    for (double& v : m.values) v = uniform(-p.off_diag_magnitude, p.off_diag_magnitude);
  if (p.scaled) {
    maps.diag_scale_a = 0.0;
    maps.diag_scale_b = -2.0;
    for (double& c : maps.off_diag_scale_c) c = 0.5;
  }
  GridMap mean(spec.shape);
  for (double& v : mean.values) v = uniform(-p.mean_amplitude, p.mean_amplitude);
  StructuredGaussian model(std::move(mean), std::move(maps));

  // Exact draws: mu + L^{-T} E by back substitution.
  SampleBundle noise = normal_bundle(spec.shape, spec.count, spec.seed + 0x9e3779b97f4a7c15ULL);
  SampleBundle bundle = solve_triangular({model.chol, Direction::lower_transpose}, noise);
  for (int s = 0; s < spec.count; ++s)
    for (int i = 0; i < bundle.shape.pixels(); ++i) bundle[s][i] += model.mean[i];
  return {std::move(bundle), std::move(model)};
}

SynthResult generate_smooth(const SynthSpec& spec, const SmoothFieldParams& p) {
  if (p.length_scale <= 0.0 || p.amplitude <= 0.0)
    throw std::invalid_argument("synth: smooth_field needs positive length scale and amplitude");

  NormalSampler rng(spec.seed);
  const int h = spec.shape.height, w = spec.shape.width;
  const int bumps = std::max(4, spec.shape.pixels() / 8);

  SampleBundle bundle(spec.shape, spec.count);
  for (int s = 0; s < spec.count; ++s) {
    GridMap& map = bundle[s];
    for (int b = 0; b < bumps; ++b) {
      const double cy = rng.next_uniform_open() * h;
      const double cx = rng.next_uniform_open() * w;
      const double weight = p.amplitude * rng.next();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double dy = (y + 0.5 - cy) / p.length_scale;
          const double dx = (x + 0.5 - cx) / p.length_scale;
          map.at(y, x) += weight * std::exp(-0.5 * (dy * dy + dx * dx));
        }
      }
    }
    if (p.nugget > 0.0)
      for (double& v : map.values) v += p.nugget * p.amplitude * rng.next();
  }
  return {std::move(bundle), std::nullopt};
}

SynthResult generate_diagonal(const SynthSpec& spec, const DiagonalNoiseParams& p) {
  if (p.mean.shape != spec.shape || p.std_dev.shape != spec.shape)
    throw std::invalid_argument("synth: diagonal_noise map shape mismatch");
  for (double v : p.std_dev.values)
    if (!(v >= 0.0)) throw std::invalid_argument("synth: diagonal_noise stds must be >= 0");

  NormalSampler rng(spec.seed);
  SampleBundle bundle(spec.shape, spec.count);
  for (int s = 0; s < spec.count; ++s)
    for (int i = 0; i < spec.shape.pixels(); ++i)
      bundle[s][i] = p.mean[i] + p.std_dev[i] * rng.next();

  bool invertible = true;
  for (double v : p.std_dev.values) invertible = invertible && v > 0.0;
  std::optional<StructuredGaussian> model;
  if (invertible) {
    CholeskyMaps maps(spec.shape, canonical_pattern(1));
    for (int i = 0; i < spec.shape.pixels(); ++i) maps.log_diag[i] = -std::log(p.std_dev[i]);
    model.emplace(p.mean, std::move(maps));
  }
  return {std::move(bundle), std::move(model)};
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("synth: count must be >= 1");
  return std::visit(
      [&spec](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, GroundTruthGmrfParams>)
          return generate_gmrf(spec, params);
        else if constexpr (std::is_same_v<T, SmoothFieldParams>)
          return generate_smooth(spec, params);
        else
          return generate_diagonal(spec, params);
      },
      spec.kind);
}

}  // namespace gmrf
