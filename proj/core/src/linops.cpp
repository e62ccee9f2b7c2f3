#include "gmrf/linops.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "gmrf/parallel.hpp"

namespace gmrf {

namespace detail {

Stencil::Stencil(const CholeskyMaps& maps) : shape(maps.shape), offsets(maps.pattern.offsets()) {
  strides.reserve(offsets.size());
  for (const Offset& o : offsets) strides.push_back(o.dy * shape.width + o.dx);
  diag = effective_diagonal(maps).values;
  std::vector<GridMap> eff = effective_off_diagonal(maps, maps.scaled);
  off.reserve(eff.size());
  for (GridMap& m : eff) off.push_back(std::move(m.values));
}

void Stencil::require_positive_diagonal() const {
  for (double d : diag)
    if (!(d > 0.0)) throw std::domain_error("triangular solve: non-positive effective diagonal");
}

// (L x)[k] = diag[k] x[k] + sum_l off[l][k] * x[k + o_l], neighbor in grid.
void Stencil::apply_lower(const double* x, double* out) const {
  const int h = shape.height, w = shape.width;
  const int num_offsets = static_cast<int>(offsets.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int k = y * w + xx;
      double acc = diag[k] * x[k];
      for (int l = 0; l < num_offsets; ++l) {
        const int ny = y + offsets[l].dy, nx = xx + offsets[l].dx;
        if (ny >= 0 && nx >= 0 && nx < w) acc += off[l][k] * x[k + strides[l]];
      }
      out[k] = acc;
    }
  }
}

// (L^T x)[n] = diag[n] x[n] + sum_l off[l][n - o_l] * x[n - o_l]: the rows
// that reference pixel n are exactly the pixels that have n as a neighbor.
void Stencil::apply_lower_transpose(const double* x, double* out) const {
  const int h = shape.height, w = shape.width;
  const int num_offsets = static_cast<int>(offsets.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int n = y * w + xx;
      double acc = diag[n] * x[n];
      for (int l = 0; l < num_offsets; ++l) {
        const int sy = y - offsets[l].dy, sx = xx - offsets[l].dx;
        if (sy < h && sx >= 0 && sx < w) {
          const int src = n - strides[l];
          acc += off[l][src] * x[src];
        }
      }
      out[n] = acc;
    }
  }
}

// Forward substitution: neighbors precede the row pixel in raster order.
void Stencil::solve_lower(const double* b, double* out) const {
  const int h = shape.height, w = shape.width;
  const int num_offsets = static_cast<int>(offsets.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int k = y * w + xx;
      double acc = b[k];
      for (int l = 0; l < num_offsets; ++l) {
        const int ny = y + offsets[l].dy, nx = xx + offsets[l].dx;
        if (ny >= 0 && nx >= 0 && nx < w) acc -= off[l][k] * out[k + strides[l]];
      }
      out[k] = acc / diag[k];
    }
  }
}

// Back substitution: the pixels referencing n lie after it in raster order.
void Stencil::solve_lower_transpose(const double* b, double* out) const {
  const int h = shape.height, w = shape.width;
  const int num_offsets = static_cast<int>(offsets.size());
  for (int y = h - 1; y >= 0; --y) {
    for (int xx = w - 1; xx >= 0; --xx) {
      const int n = y * w + xx;
      double acc = b[n];
      for (int l = 0; l < num_offsets; ++l) {
        const int sy = y - offsets[l].dy, sx = xx - offsets[l].dx;
        if (sy < h && sx >= 0 && sx < w) {
          const int src = n - strides[l];
          acc -= off[l][src] * out[src];
        }
      }
      out[n] = acc / diag[n];
    }
  }
}

namespace {

// One Jacobi sweep for L^T s = e: out[n] = (e[n] - sum U[n,:] s) / diag[n].
void jacobi_sweep_Lt(const Stencil& st, const double* e, const double* s, double* out) {
  const int h = st.shape.height, w = st.shape.width;
  const int num_offsets = static_cast<int>(st.offsets.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int n = y * w + xx;
      double acc = e[n];
      for (int l = 0; l < num_offsets; ++l) {
        const int sy = y - st.offsets[l].dy, sx = xx - st.offsets[l].dx;
        if (sy < h && sx >= 0 && sx < w) {
          const int src = n - st.strides[l];
          acc -= st.off[l][src] * s[src];
        }
      }
      out[n] = acc / st.diag[n];
    }
  }
}

void jacobi_sweep_L(const Stencil& st, const double* e, const double* s, double* out) {
  const int h = st.shape.height, w = st.shape.width;
  const int num_offsets = static_cast<int>(st.offsets.size());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const int k = y * w + xx;
      double acc = e[k];
      for (int l = 0; l < num_offsets; ++l) {
        const int ny = y + st.offsets[l].dy, nx = xx + st.offsets[l].dx;
        if (ny >= 0 && nx >= 0 && nx < w) acc -= st.off[l][k] * s[k + st.strides[l]];
      }
      out[k] = acc / st.diag[k];
    }
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Runs the fixed-count iteration on one sample, double-buffered.
template <typename Sweep, typename ApplyForResidual>
void jacobi_run(const Stencil& st, const std::vector<double>& e, std::vector<double>& s,
                int iterations, double residual_tol, Sweep sweep, ApplyForResidual apply_op) {
  const size_t n = e.size();
  std::vector<double> next(n);
  const double rhs_norm = residual_tol > 0.0 ? max_abs(e) : 0.0;
  std::vector<double> work(residual_tol > 0.0 ? n : 0);
  s = e;  // S^(0) = E
  for (int j = 0; j < iterations; ++j) {
    sweep(st, e.data(), s.data(), next.data());
    s.swap(next);
    if (residual_tol > 0.0) {
      apply_op(st, s.data(), work.data());
      double res = 0.0;
      for (size_t i = 0; i < n; ++i) res = std::max(res, std::abs(work[i] - e[i]));
      if (res <= residual_tol * rhs_norm) break;
    }
  }
}

void check_shapes(const CholeskyMaps& maps, const GridShape& x) {
  if (maps.shape != x) throw std::invalid_argument("linops: map/operand shape mismatch");
}

}  // namespace

}  // namespace detail

GridMap apply(const LinearOperatorView& op, const GridMap& x) {
  detail::check_shapes(*op.maps, x.shape);
  const detail::Stencil st(*op.maps);
  GridMap out(x.shape);
  switch (op.direction) {
    case Direction::lower:
      st.apply_lower(x.values.data(), out.values.data());
      break;
    case Direction::lower_transpose:
      st.apply_lower_transpose(x.values.data(), out.values.data());
      break;
    case Direction::precision: {
      GridMap tmp(x.shape);
      st.apply_lower_transpose(x.values.data(), tmp.values.data());
      st.apply_lower(tmp.values.data(), out.values.data());
      break;
    }
  }
  return out;
}

SampleBundle apply(const LinearOperatorView& op, const SampleBundle& x) {
  detail::check_shapes(*op.maps, x.shape);
  const detail::Stencil st(*op.maps);
  SampleBundle out(x.shape, x.count());
  parallel_for(x.count(), [&](int s) {
    GridMap tmp(x.shape);
    switch (op.direction) {
      case Direction::lower:
        st.apply_lower(x[s].values.data(), out[s].values.data());
        break;
      case Direction::lower_transpose:
        st.apply_lower_transpose(x[s].values.data(), out[s].values.data());
        break;
      case Direction::precision:
        st.apply_lower_transpose(x[s].values.data(), tmp.values.data());
        st.apply_lower(tmp.values.data(), out[s].values.data());
        break;
    }
  });
  return out;
}

GridMap solve_triangular(const LinearOperatorView& op, const GridMap& b) {
  detail::check_shapes(*op.maps, b.shape);
  if (op.direction == Direction::precision)
    throw std::invalid_argument("solve_triangular: direction must be lower or lower_transpose");
  const detail::Stencil st(*op.maps);
  st.require_positive_diagonal();
  GridMap out(b.shape);
  if (op.direction == Direction::lower)
    st.solve_lower(b.values.data(), out.values.data());
  else
    st.solve_lower_transpose(b.values.data(), out.values.data());
  return out;
}

SampleBundle solve_triangular(const LinearOperatorView& op, const SampleBundle& b) {
  detail::check_shapes(*op.maps, b.shape);
  if (op.direction == Direction::precision)
    throw std::invalid_argument("solve_triangular: direction must be lower or lower_transpose");
  const detail::Stencil st(*op.maps);
  st.require_positive_diagonal();
  SampleBundle out(b.shape, b.count());
  parallel_for(b.count(), [&](int s) {
    if (op.direction == Direction::lower)
      st.solve_lower(b[s].values.data(), out[s].values.data());
    else
      st.solve_lower_transpose(b[s].values.data(), out[s].values.data());
  });
  return out;
}

SampleBundle jacobi_solve_Lt(const CholeskyMaps& maps, const SampleBundle& rhs, int iterations,
                             double residual_tol) {
  detail::check_shapes(maps, rhs.shape);
  if (iterations < 1) throw std::invalid_argument("jacobi_solve_Lt: iterations must be >= 1");
  const detail::Stencil st(maps);
  st.require_positive_diagonal();
  SampleBundle out(rhs.shape, rhs.count());
  parallel_for(rhs.count(), [&](int s) {
    detail::jacobi_run(st, rhs[s].values, out[s].values, iterations, residual_tol,
                       detail::jacobi_sweep_Lt,
                       [](const detail::Stencil& stc, const double* x, double* y) {
                         stc.apply_lower_transpose(x, y);
                       });
  });
  return out;
}

GridMap jacobi_solve_Lt(const CholeskyMaps& maps, const GridMap& rhs, int iterations,
                        double residual_tol) {
  SampleBundle b(rhs.shape, 1);
  b[0] = rhs;
  return jacobi_solve_Lt(maps, b, iterations, residual_tol)[0];
}

GridMap jacobi_solve_L(const CholeskyMaps& maps, const GridMap& rhs, int iterations,
                       double residual_tol) {
  detail::check_shapes(maps, rhs.shape);
  if (iterations < 1) throw std::invalid_argument("jacobi_solve_L: iterations must be >= 1");
  const detail::Stencil st(maps);
  st.require_positive_diagonal();
  GridMap out(rhs.shape);
  detail::jacobi_run(st, rhs.values, out.values, iterations, residual_tol, detail::jacobi_sweep_L,
                     [](const detail::Stencil& stc, const double* x, double* y) {
                       stc.apply_lower(x, y);
                     });
  return out;
}

}  // namespace gmrf
