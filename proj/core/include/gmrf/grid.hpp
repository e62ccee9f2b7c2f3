#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmrf {

/// Rectangular pixel grid. Pixels are enumerated in raster order
/// (row-major, y-major / x-minor); this ordering defines the triangular
/// structure of every matrix in the library.
struct GridShape {
  int height = 0;
  int width = 0;

  GridShape() = default;
  GridShape(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 1) throw std::invalid_argument("GridShape: height and width must be >= 1");
  }

  int pixels() const { return height * width; }
  bool contains(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }
  int index(int y, int x) const { return y * width + x; }
  int index_y(int n) const { return n / width; }
  int index_x(int n) const { return n % width; }

  friend bool operator==(const GridShape& a, const GridShape& b) {
    return a.height == b.height && a.width == b.width;
  }
  friend bool operator!=(const GridShape& a, const GridShape& b) { return !(a == b); }
};

/// Relative pixel position (dy, dx).
struct Offset {
  int dy = 0;
  int dx = 0;
  friend bool operator==(const Offset& a, const Offset& b) { return a.dy == b.dy && a.dx == b.dx; }
};

/// The set of lower-triangular neighbor offsets carrying the off-diagonal
/// entries of the sparse Cholesky factor. Every offset points to a pixel
/// that strictly precedes the center in raster order (dy < 0, or dy == 0
/// and dx < 0), so the implied matrix is lower triangular by construction.
class SparsityPattern {
 public:
  SparsityPattern() = default;
  SparsityPattern(int radius, std::vector<Offset> offsets);

  int radius() const { return radius_; }
  const std::vector<Offset>& offsets() const { return offsets_; }
  int size() const { return static_cast<int>(offsets_.size()); }

  friend bool operator==(const SparsityPattern& a, const SparsityPattern& b) {
    return a.radius_ == b.radius_ && a.offsets_ == b.offsets_;
  }

 private:
  int radius_ = 0;
  std::vector<Offset> offsets_;
};

/// Lower-triangular offsets of the (2r+1)x(2r+1) neighborhood in canonical
/// order (row-major scan). radius 1 -> 4 offsets, radius 2 -> 12.
SparsityPattern canonical_pattern(int radius);

/// Dense H x W map of doubles, row-major.
struct GridMap {
  GridShape shape;
  std::vector<double> values;

  GridMap() = default;
  explicit GridMap(GridShape s, double fill = 0.0)
      : shape(s), values(static_cast<size_t>(s.pixels()), fill) {}
  GridMap(GridShape s, std::vector<double> v) : shape(s), values(std::move(v)) {
    if (static_cast<int>(values.size()) != shape.pixels())
      throw std::invalid_argument("GridMap: value count does not match shape");
  }

  double& operator[](int n) { return values[static_cast<size_t>(n)]; }
  double operator[](int n) const { return values[static_cast<size_t>(n)]; }
  double& at(int y, int x) { return values[static_cast<size_t>(shape.index(y, x))]; }
  double at(int y, int x) const { return values[static_cast<size_t>(shape.index(y, x))]; }
  int size() const { return shape.pixels(); }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// A batch of S grid-shaped sample maps sharing one shape.
struct SampleBundle {
  GridShape shape;
  std::vector<GridMap> maps;

  SampleBundle() = default;
  SampleBundle(GridShape s, int count) : shape(s), maps(static_cast<size_t>(count), GridMap(s)) {
    if (count < 1) throw std::invalid_argument("SampleBundle: count must be >= 1");
  }

  int count() const { return static_cast<int>(maps.size()); }
  GridMap& operator[](int s) { return maps[static_cast<size_t>(s)]; }
  const GridMap& operator[](int s) const { return maps[static_cast<size_t>(s)]; }

  // Throws if maps disagree on shape or contain non-finite values.
  void validate() const;
};

/// Per-pixel parameter maps of the sparse lower-triangular Cholesky factor
/// of the precision matrix:
///   diagonal   = exp(log_diag)                      (scaled == false)
///              = exp(log_diag + a) + exp(b)         (scaled == true)
///   off-diag l = off_diag[l]                        (scaled == false)
///              = tanh(off_diag[l]) * c[l]           (scaled == true)
/// Off-diagonal entries whose neighbor falls outside the grid contribute
/// exactly zero to the implied matrix.
struct CholeskyMaps {
  GridShape shape;
  SparsityPattern pattern;
  GridMap log_diag;                    // phi
  std::vector<GridMap> off_diag;       // psi, one map per pattern offset
  bool scaled = false;
  double diag_scale_a = 0.0;           // a
  double diag_scale_b = 0.0;           // b, only meaningful when scaled
  std::vector<double> off_diag_scale_c;  // c, one per offset, only when scaled

  CholeskyMaps() = default;
  CholeskyMaps(GridShape s, SparsityPattern p);

  /// Unit-diagonal, zero off-diagonal factor (the identity configuration).
  static CholeskyMaps identity(GridShape s, int radius = 1);

  int offset_count() const { return pattern.size(); }
  GridMap effective_diagonal() const;
  GridMap log_effective_diagonal() const;
  std::vector<GridMap> effective_off_diagonal() const;

  // Throws if any parameter is non-finite or map shapes disagree.
  void validate() const;
};

/// exp(log_diag + a) + exp(b) elementwise when scaled, exp(log_diag) otherwise.
GridMap effective_diagonal(const CholeskyMaps& maps);

/// log of the effective diagonal, computed in log space (log-sum-exp of
/// log_diag + a and b) so large parameters do not overflow.
GridMap log_effective_diagonal(const CholeskyMaps& maps);

/// tanh(psi) * c_l per offset map when scaled, psi directly otherwise.
std::vector<GridMap> effective_off_diagonal(const CholeskyMaps& maps, bool scaled);

}  // namespace gmrf
