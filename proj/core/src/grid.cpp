#include "gmrf/grid.hpp"

#include <algorithm>
#include <cmath>

namespace gmrf {

namespace {

bool precedes_origin(const Offset& o) { return o.dy < 0 || (o.dy == 0 && o.dx < 0); }

}  // namespace

SparsityPattern::SparsityPattern(int radius, std::vector<Offset> offsets)
    : radius_(radius), offsets_(std::move(offsets)) {
  if (radius_ < 1) throw std::invalid_argument("SparsityPattern: radius must be >= 1");
  for (size_t i = 0; i < offsets_.size(); ++i) {
    const Offset& o = offsets_[i];
    if (!precedes_origin(o))
      throw std::invalid_argument("SparsityPattern: offset does not precede (0,0) in raster order");
    if (std::abs(o.dy) > radius_ || std::abs(o.dx) > radius_)
      throw std::invalid_argument("SparsityPattern: offset outside neighborhood radius");
    for (size_t j = 0; j < i; ++j)
      if (offsets_[j] == o) throw std::invalid_argument("SparsityPattern: duplicate offset");
  }
}

SparsityPattern canonical_pattern(int radius) {
  if (radius < 1) throw std::invalid_argument("canonical_pattern: radius must be >= 1");
  std::vector<Offset> offsets;
  offsets.reserve(static_cast<size_t>(((2 * radius + 1) * (2 * radius + 1) - 1) / 2));
  for (int dy = -radius; dy <= 0; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dy == 0 && dx >= 0) break;  // reached (0,0); later neighbors are upper triangular
      offsets.push_back({dy, dx});
    }
  }
  return SparsityPattern(radius, std::move(offsets));
}

void SampleBundle::validate() const {
  if (maps.empty()) throw std::invalid_argument("SampleBundle: empty bundle");
  for (const GridMap& m : maps) {
    if (m.shape != shape) throw std::invalid_argument("SampleBundle: map shape mismatch");
    if (!m.all_finite()) throw std::invalid_argument("SampleBundle: non-finite sample value");
  }
}

CholeskyMaps::CholeskyMaps(GridShape s, SparsityPattern p)
    : shape(s),
      pattern(std::move(p)),
      log_diag(s),
      off_diag(static_cast<size_t>(pattern.size()), GridMap(s)),
      off_diag_scale_c(static_cast<size_t>(pattern.size()), 1.0) {}

CholeskyMaps CholeskyMaps::identity(GridShape s, int radius) {
  return CholeskyMaps(s, canonical_pattern(radius));
}

void CholeskyMaps::validate() const {
  if (log_diag.shape != shape) throw std::invalid_argument("CholeskyMaps: log_diag shape mismatch");
  if (static_cast<int>(off_diag.size()) != pattern.size())
    throw std::invalid_argument("CholeskyMaps: off_diag map count does not match pattern");
  if (static_cast<int>(off_diag_scale_c.size()) != pattern.size())
    throw std::invalid_argument("CholeskyMaps: off_diag_scale_c length does not match pattern");
  if (!log_diag.all_finite()) throw std::invalid_argument("CholeskyMaps: non-finite log_diag");
  for (const GridMap& m : off_diag) {
    if (m.shape != shape) throw std::invalid_argument("CholeskyMaps: off_diag shape mismatch");
    if (!m.all_finite()) throw std::invalid_argument("CholeskyMaps: non-finite off_diag");
  }
  if (!std::isfinite(diag_scale_a) || (scaled && !std::isfinite(diag_scale_b)))
    throw std::invalid_argument("CholeskyMaps: non-finite diagonal scaling");
  for (double c : off_diag_scale_c)
    if (!std::isfinite(c)) throw std::invalid_argument("CholeskyMaps: non-finite off_diag scale");
}

GridMap effective_diagonal(const CholeskyMaps& maps) {
  GridMap out(maps.shape);
  const int n = maps.shape.pixels();
  if (maps.scaled) {
    for (int i = 0; i < n; ++i)
      out[i] = std::exp(maps.log_diag[i] + maps.diag_scale_a) + std::exp(maps.diag_scale_b);
  } else {
    for (int i = 0; i < n; ++i) out[i] = std::exp(maps.log_diag[i]);
  }
  return out;
}

GridMap log_effective_diagonal(const CholeskyMaps& maps) {
  GridMap out(maps.shape);
  const int n = maps.shape.pixels();
  if (maps.scaled) {
    // log(exp(phi + a) + exp(b)) via log-sum-exp
    for (int i = 0; i < n; ++i) {
      const double u = maps.log_diag[i] + maps.diag_scale_a;
      const double v = maps.diag_scale_b;
      const double m = std::max(u, v);
      out[i] = m + std::log1p(std::exp(std::min(u, v) - m));
    }
  } else {
    out = maps.log_diag;
  }
  return out;
}

std::vector<GridMap> effective_off_diagonal(const CholeskyMaps& maps, bool scaled) {
  if (!scaled) return maps.off_diag;
  std::vector<GridMap> out;
  out.reserve(maps.off_diag.size());
  const int n = maps.shape.pixels();
  for (size_t l = 0; l < maps.off_diag.size(); ++l) {
    GridMap m(maps.shape);
    const double c = maps.off_diag_scale_c[l];
    for (int i = 0; i < n; ++i) m[i] = std::tanh(maps.off_diag[l][i]) * c;
    out.push_back(std::move(m));
  }
  return out;
}

GridMap CholeskyMaps::effective_diagonal() const { return gmrf::effective_diagonal(*this); }
GridMap CholeskyMaps::log_effective_diagonal() const { return gmrf::log_effective_diagonal(*this); }
std::vector<GridMap> CholeskyMaps::effective_off_diagonal() const {
  return gmrf::effective_off_diagonal(*this, scaled);
}

}  // namespace gmrf
