#pragma once

#include "gmrf/grid.hpp"

namespace gmrf {

/// Number of Jacobi iterations used when the caller does not override it.
inline constexpr int kDefaultJacobiIterations = 1000;

enum class Direction {
  lower,            // L
  lower_transpose,  // L^T
  precision,        // Lambda = L L^T
};

/// Matrix-free view of L, L^T or Lambda for a given parameter set. Borrows
/// the maps; the view must not outlive them.
///
/// Convention (fixed repo-wide): row k of L holds the preceding neighbors of
/// pixel k, i.e. L[k, idx(y+dy, x+dx)] = off_diag_l(k) for pattern offset
/// l = (dy,dx), and L[k,k] is the effective diagonal. Neighbors outside the
/// grid contribute zero.
struct LinearOperatorView {
  const CholeskyMaps* maps = nullptr;
  Direction direction = Direction::lower;

  LinearOperatorView(const CholeskyMaps& m, Direction d) : maps(&m), direction(d) {}
};

/// Matrix-vector product with the raster-flattened map, reshaped back to the
/// grid. O(N * L) work.
GridMap apply(const LinearOperatorView& op, const GridMap& x);
SampleBundle apply(const LinearOperatorView& op, const SampleBundle& x);

/// Exact forward/back substitution in raster order. direction must be lower
/// or lower_transpose. Throws std::domain_error if the effective diagonal is
/// not strictly positive.
GridMap solve_triangular(const LinearOperatorView& op, const GridMap& b);
SampleBundle solve_triangular(const LinearOperatorView& op, const SampleBundle& b);

/// Truncated Jacobi solve of L^T s = e for every sample in the bundle:
///   s(0) = e,   s(j+1) = D^{-1} (e - U s(j)),
/// with D the diagonal of L^T and U = L^T - D strictly upper triangular.
/// The iteration matrix is nilpotent, so the result is exact once
/// iterations >= N. residual_tol > 0 enables an optional per-sample early
/// stop when ||L^T s - e||_inf <= residual_tol * ||e||_inf; the default 0
/// runs the fixed iteration count.
SampleBundle jacobi_solve_Lt(const CholeskyMaps& maps, const SampleBundle& rhs, int iterations,
                             double residual_tol = 0.0);
GridMap jacobi_solve_Lt(const CholeskyMaps& maps, const GridMap& rhs, int iterations,
                        double residual_tol = 0.0);

/// Same scheme for the lower-triangular system L s = b (used by the Jacobi
/// variant of covariance introspection).
GridMap jacobi_solve_L(const CholeskyMaps& maps, const GridMap& rhs, int iterations,
                       double residual_tol = 0.0);

namespace detail {

/// Evaluated stencil: effective diagonal and off-diagonal value maps plus
/// precomputed raster strides. Evaluating tanh/exp once up front keeps the
/// per-iteration cost of the solvers at N*L multiply-adds.
struct Stencil {
  GridShape shape;
  std::vector<Offset> offsets;
  std::vector<int> strides;          // raster delta of each offset
  std::vector<double> diag;          // N
  std::vector<std::vector<double>> off;  // L x N, value stored at the row pixel

  explicit Stencil(const CholeskyMaps& maps);

  void apply_lower(const double* x, double* out) const;
  void apply_lower_transpose(const double* x, double* out) const;
  void solve_lower(const double* b, double* out) const;
  void solve_lower_transpose(const double* b, double* out) const;
  void require_positive_diagonal() const;
};

}  // namespace detail

}  // namespace gmrf
