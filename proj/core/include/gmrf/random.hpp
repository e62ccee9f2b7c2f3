#pragma once

#include <cstdint>
#include <random>

#include "gmrf/grid.hpp"

namespace gmrf {

/// Seeded standard-normal stream. The generator is pinned for reproducibility
/// across platforms and releases: std::mt19937_64 (bit-exact per the C++
/// standard) feeding 53-bit uniforms into a Box-Muller transform. Do not
/// change the transform; stored seeds and golden outputs depend on it.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : engine_(seed) {}

  /// Uniform draw in (0, 1], 53-bit resolution.
  double next_uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// One standard-normal draw.
  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform_open();
    const double u2 = next_uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline GridMap normal_map(GridShape shape, NormalSampler& rng) {
  GridMap m(shape);
  for (double& v : m.values) v = rng.next();
  return m;
}

/// S maps of i.i.d. standard normals, filled sample-major from one stream.
inline SampleBundle normal_bundle(GridShape shape, int count, uint64_t seed) {
  SampleBundle bundle(shape, count);
  NormalSampler rng(seed);
  for (int s = 0; s < count; ++s) bundle[s] = normal_map(shape, rng);
  return bundle;
}

}  // namespace gmrf
