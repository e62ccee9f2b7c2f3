#include "gmrf/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmrf/errors.hpp"
#include "gmrf/linops.hpp"

namespace gmrf {

int PixelMask::known_count() const {
  int c = 0;
  for (uint8_t k : known) c += (k != 0);
  return c;
}

std::vector<double> SparseRows::multiply(const std::vector<double>& x) const {
  std::vector<double> out(static_cast<size_t>(rows), 0.0);
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (const auto& [c, v] : entries[static_cast<size_t>(r)]) acc += v * x[static_cast<size_t>(c)];
    out[static_cast<size_t>(r)] = acc;
  }
  return out;
}

int SparseRows::max_nonzeros_per_row() const {
  size_t m = 0;
  for (const auto& row : entries) m = std::max(m, row.size());
  return static_cast<int>(m);
}

namespace {

// Nonzero columns of L restricted to one column k: the diagonal entry plus
// every row pixel that has k as a pattern neighbor.
struct ColumnEntry {
  int row;
  double value;
};

}  // namespace

PrecisionBlocks assemble_precision_blocks(const CholeskyMaps& maps, const PixelMask& mask) {
  if (mask.shape != maps.shape)
    throw std::invalid_argument("assemble_precision_blocks: mask shape mismatch");

  const GridShape shape = maps.shape;
  const int n = shape.pixels();
  const int h = shape.height, w = shape.width;
  const std::vector<Offset>& offsets = maps.pattern.offsets();
  const int num_offsets = static_cast<int>(offsets.size());

  const GridMap diag = effective_diagonal(maps);
  const std::vector<GridMap> off = effective_off_diagonal(maps, maps.scaled);

  PrecisionBlocks blocks;
  std::vector<int> local(static_cast<size_t>(n));  // raster -> local index in its partition
  for (int i = 0; i < n; ++i) {
    if (mask.is_known(i)) {
      local[static_cast<size_t>(i)] = static_cast<int>(blocks.known_index.size());
      blocks.known_index.push_back(i);
    } else {
      local[static_cast<size_t>(i)] = static_cast<int>(blocks.unknown_index.size());
      blocks.unknown_index.push_back(i);
    }
  }

  // Lambda = L L^T accumulated column by column: each column k of L touches
  // at most 1 + L rows, so Lambda gains the outer product of that short
  // column with itself. Only rows in U are kept.
  std::vector<std::vector<std::pair<int, double>>> uu_rows(blocks.unknown_index.size());
  std::vector<std::vector<std::pair<int, double>>> uk_rows(blocks.unknown_index.size());

  std::vector<ColumnEntry> column;
  column.reserve(static_cast<size_t>(num_offsets) + 1);
  for (int k = 0; k < n; ++k) {
    column.clear();
    column.push_back({k, diag[k]});
    const int ky = shape.index_y(k), kx = shape.index_x(k);
    for (int l = 0; l < num_offsets; ++l) {
      // row pixel r has k as its offset-l neighbor: r = k - o_l
      const int ry = ky - offsets[l].dy, rx = kx - offsets[l].dx;
      if (ry < h && rx >= 0 && rx < w) {
        const int r = shape.index(ry, rx);
        column.push_back({r, off[static_cast<size_t>(l)][r]});
      }
    }
    for (const ColumnEntry& a : column) {
      if (mask.is_known(a.row)) continue;
      const int ulocal = local[static_cast<size_t>(a.row)];
      for (const ColumnEntry& b : column) {
        const double v = a.value * b.value;
        if (mask.is_known(b.row))
          uk_rows[static_cast<size_t>(ulocal)].emplace_back(local[static_cast<size_t>(b.row)], v);
        else
          uu_rows[static_cast<size_t>(ulocal)].emplace_back(local[static_cast<size_t>(b.row)], v);
      }
    }
  }

  auto compress = [](std::vector<std::vector<std::pair<int, double>>>& rows) {
    for (auto& row : rows) {
      std::sort(row.begin(), row.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      size_t out = 0;
      for (size_t i = 0; i < row.size(); ++i) {
        if (out > 0 && row[out - 1].first == row[i].first)
          row[out - 1].second += row[i].second;
        else
          row[out++] = row[i];
      }
      row.resize(out);
    }
  };
  compress(uu_rows);
  compress(uk_rows);

  blocks.uu = {static_cast<int>(blocks.unknown_index.size()),
               static_cast<int>(blocks.unknown_index.size()), std::move(uu_rows)};
  blocks.uk = {static_cast<int>(blocks.unknown_index.size()),
               static_cast<int>(blocks.known_index.size()), std::move(uk_rows)};
  return blocks;
}

namespace detail {

std::vector<double> conjugate_gradient(const SparseRows& a, const std::vector<double>& b,
                                       double rel_tol) {
  const size_t n = b.size();
  std::vector<double> x(n, 0.0);
  double b_norm2 = 0.0;
  for (double v : b) b_norm2 += v * v;
  if (b_norm2 == 0.0) return x;

  std::vector<double> r = b;  // residual of x = 0
  std::vector<double> p = r;
  double rr = b_norm2;
  const double target2 = rel_tol * rel_tol * b_norm2;
  const int max_iterations = 10 * static_cast<int>(n);

  for (int it = 0; it < max_iterations; ++it) {
    if (rr <= target2) return x;
    const std::vector<double> ap = a.multiply(p);
    double pap = 0.0;
    for (size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0))
      throw SolverError("conjugate_gradient: matrix not positive definite", std::sqrt(rr / b_norm2),
                        it);
    const double alpha = rr / pap;
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rr_next = 0.0;
    for (size_t i = 0; i < n; ++i) rr_next += r[i] * r[i];
    const double beta = rr_next / rr;
    for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
  }
  if (rr <= target2) return x;
  throw SolverError("conjugate_gradient: no convergence within iteration cap",
                    std::sqrt(rr / b_norm2), max_iterations);
}

}  // namespace detail

namespace {

// Lambda_UU^{-1} Lambda_UK innovation, gathered from a full-grid map of
// (values - reference) on the known pixels.
std::vector<double> solve_innovation(const PrecisionBlocks& blocks, const GridMap& values,
                                     const GridMap& reference, double tol) {
  std::vector<double> delta_k(blocks.known_index.size());
  for (size_t i = 0; i < blocks.known_index.size(); ++i) {
    const int pix = blocks.known_index[i];
    delta_k[i] = values[pix] - reference[pix];
  }
  const std::vector<double> rhs = blocks.uk.multiply(delta_k);
  return detail::conjugate_gradient(blocks.uu, rhs, tol);
}

}  // namespace

GridMap conditional_mean(const StructuredGaussian& g, const Conditioning& cond, double solver_tol) {
  if (cond.mask.shape != g.shape()) throw std::invalid_argument("conditional_mean: shape mismatch");

  const int known = cond.mask.known_count();
  if (known == 0) return g.mean;

  GridMap out = g.mean;
  for (int i = 0; i < g.shape().pixels(); ++i)
    if (cond.mask.is_known(i)) out[i] = cond.values[i];
  if (known == g.shape().pixels()) return out;  // degenerate: everything observed

  const PrecisionBlocks blocks = assemble_precision_blocks(g.chol, cond.mask);
  const std::vector<double> correction = solve_innovation(blocks, cond.values, g.mean, solver_tol);
  for (size_t u = 0; u < blocks.unknown_index.size(); ++u)
    out[blocks.unknown_index[u]] = g.mean[blocks.unknown_index[u]] - correction[u];
  return out;
}

SampleBundle conditional_sample(const StructuredGaussian& g, const Conditioning& cond, int count,
                                uint64_t seed, int jacobi_iterations, double solver_tol) {
  if (cond.mask.shape != g.shape())
    throw std::invalid_argument("conditional_sample: shape mismatch");

  SampleBundle joint = sample(g, count, seed, jacobi_iterations);
  const int known = cond.mask.known_count();
  if (known == 0) return joint;

  const int n = g.shape().pixels();
  if (known == n) {
    for (int s = 0; s < count; ++s) joint[s] = cond.values;
    return joint;
  }

  const PrecisionBlocks blocks = assemble_precision_blocks(g.chol, cond.mask);
  for (int s = 0; s < count; ++s) {
    const std::vector<double> correction =
        solve_innovation(blocks, cond.values, joint[s], solver_tol);
    for (size_t u = 0; u < blocks.unknown_index.size(); ++u)
      joint[s][blocks.unknown_index[u]] -= correction[u];
    for (int i = 0; i < n; ++i)
      if (cond.mask.is_known(i)) joint[s][i] = cond.values[i];
  }
  return joint;
}

}  // namespace gmrf
