#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gmrf/distribution.hpp"
#include "gmrf/grid.hpp"

namespace gmrf {

/// Partition of the grid into known (1) and unknown (0) pixels.
struct PixelMask {
  GridShape shape;
  std::vector<uint8_t> known;

  PixelMask() = default;
  explicit PixelMask(GridShape s) : shape(s), known(static_cast<size_t>(s.pixels()), 0) {}

  bool is_known(int n) const { return known[static_cast<size_t>(n)] != 0; }
  int known_count() const;
};

/// Known-pixel values; read only where the mask marks a pixel known.
struct Conditioning {
  PixelMask mask;
  GridMap values;

  Conditioning() = default;
  Conditioning(PixelMask m, GridMap v) : mask(std::move(m)), values(std::move(v)) {
    if (mask.shape != values.shape)
      throw std::invalid_argument("Conditioning: mask/values shape mismatch");
  }
};

/// Sparse matrix stored as per-row (column, value) lists sorted by column.
struct SparseRows {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<std::pair<int, double>>> entries;

  std::vector<double> multiply(const std::vector<double>& x) const;
  int max_nonzeros_per_row() const;
};

/// Mask-partitioned blocks of Lambda = L L^T. Column indices in uu and uk
/// are local to the unknown/known index lists. An all-known mask yields an
/// empty unknown block (the degenerate case callers must handle).
struct PrecisionBlocks {
  std::vector<int> unknown_index;  // raster ids of unknown pixels
  std::vector<int> known_index;    // raster ids of known pixels
  SparseRows uu;                   // Lambda_UU, |U| x |U|, SPD
  SparseRows uk;                   // Lambda_UK, |U| x |K|

  bool degenerate() const { return unknown_index.empty(); }
};

/// Assembles the pattern-overlap nonzeros of Lambda and partitions them by
/// the mask. Bandwidth is bounded by 2*radius*width + 2*radius.
PrecisionBlocks assemble_precision_blocks(const CholeskyMaps& maps, const PixelMask& mask);

/// Conditional mean: alpha on known pixels, mu_U - Lambda_UU^{-1} Lambda_UK
/// (alpha - mu_K) on unknowns. The SPD solve uses conjugate gradients to the
/// given relative-residual tolerance (iteration cap 10*|U|); non-convergence
/// throws SolverError with the residual.
GridMap conditional_mean(const StructuredGaussian& g, const Conditioning& cond,
                         double solver_tol = 1e-10);

/// Conditional samples: draws joint samples via the Jacobi sampler, then
/// corrects each on the unknowns with the precision-form innovation
/// b - Lambda_UU^{-1} Lambda_UK (alpha - a). Known pixels carry alpha
/// exactly. With no known pixels this reduces to unconditional sampling
/// (identical bundle for the same seed); with no unknown pixels every sample
/// equals alpha.
SampleBundle conditional_sample(const StructuredGaussian& g, const Conditioning& cond, int count,
                                uint64_t seed, int jacobi_iterations = kDefaultJacobiIterations,
                                double solver_tol = 1e-10);

namespace detail {

/// Conjugate gradient on an SPD SparseRows matrix. Returns the solution;
/// throws SolverError if the relative residual (vs ||b||, zero b -> zero x)
/// is not reached within 10*n iterations.
std::vector<double> conjugate_gradient(const SparseRows& a, const std::vector<double>& b,
                                       double rel_tol);

}  // namespace detail

}  // namespace gmrf
