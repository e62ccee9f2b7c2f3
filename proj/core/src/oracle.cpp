#include "gmrf/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "gmrf/errors.hpp"
#include "gmrf/linops.hpp"
#include "gmrf/random.hpp"

namespace gmrf {

namespace {

void check_capacity(int pixels, const char* what) {
  if (pixels > kDenseCapacity)
    throw CapacityError(std::string(what) + ": grid exceeds dense capacity of " +
                        std::to_string(kDenseCapacity) + " pixels");
}

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

}  // namespace

Eigen::MatrixXd dense_lower_factor(const CholeskyMaps& maps) {
  const GridShape shape = maps.shape;
  const int n = shape.pixels();
  check_capacity(n, "dense_lower_factor");

  const GridMap diag = effective_diagonal(maps);
  const std::vector<GridMap> off = effective_off_diagonal(maps, maps.scaled);
  const std::vector<Offset>& offsets = maps.pattern.offsets();

  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    lower(k, k) = diag[k];
    const int y = shape.index_y(k), x = shape.index_x(k);
    for (size_t l = 0; l < offsets.size(); ++l) {
      const int ny = y + offsets[l].dy, nx = x + offsets[l].dx;
      if (shape.contains(ny, nx)) lower(k, shape.index(ny, nx)) = off[l][k];
    }
  }
  return lower;
}

DenseGaussian assemble_dense(const StructuredGaussian& g) {
  const int n = g.shape().pixels();
  check_capacity(n, "assemble_dense");

  DenseGaussian d;
  d.shape = g.shape();
  d.mean = Eigen::Map<const Eigen::VectorXd>(g.mean.values.data(), n);
  d.cholesky_precision = dense_lower_factor(g.chol);
  d.precision = d.cholesky_precision * d.cholesky_precision.transpose();
  d.covariance = d.precision.llt().solve(Eigen::MatrixXd::Identity(n, n));
  return d;
}

double dense_log_density(const DenseGaussian& d, const GridMap& x) {
  const int n = static_cast<int>(d.mean.size());
  if (x.shape != d.shape) throw std::invalid_argument("dense_log_density: shape mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(x.values.data(), n);
  const Eigen::VectorXd r = xv - d.mean;
  const Eigen::VectorXd t = d.cholesky_precision.transpose() * r;
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(d.cholesky_precision(i, i));
  return -0.5 * n * kLogTwoPi + log_det - 0.5 * t.squaredNorm();
}

SampleBundle dense_sample(const DenseGaussian& d, int count, uint64_t seed) {
  const int n = static_cast<int>(d.mean.size());
  const Eigen::MatrixXd root = d.covariance.llt().matrixL();
  SampleBundle noise = normal_bundle(d.shape, count, seed);
  SampleBundle out(d.shape, count);
  for (int s = 0; s < count; ++s) {
    const Eigen::Map<const Eigen::VectorXd> eps(noise[s].values.data(), n);
    Eigen::Map<Eigen::VectorXd>(out[s].values.data(), n) = d.mean + root * eps;
  }
  return out;
}

DenseConditional dense_conditional(const DenseGaussian& d, const Conditioning& cond) {
  if (cond.mask.shape != d.shape)
    throw std::invalid_argument("dense_conditional: mask shape mismatch");
  const int n = static_cast<int>(d.mean.size());

  std::vector<int> unknown, known;
  for (int i = 0; i < n; ++i) (cond.mask.is_known(i) ? known : unknown).push_back(i);
  const int nu = static_cast<int>(unknown.size()), nk = static_cast<int>(known.size());

  DenseConditional out;
  out.unknown_index = unknown;
  out.full_mean = GridMap(d.shape);

  if (nk == 0) {
    out.mean_unknown = d.mean;
    out.covariance_unknown = d.covariance;
    for (int i = 0; i < n; ++i) out.full_mean[i] = d.mean(i);
    return out;
  }

  Eigen::VectorXd alpha(nk), mean_k(nk);
  for (int i = 0; i < nk; ++i) {
    alpha(i) = cond.values[known[static_cast<size_t>(i)]];
    mean_k(i) = d.mean(known[static_cast<size_t>(i)]);
  }

  Eigen::MatrixXd sigma_kk(nk, nk), sigma_uk(nu, nk), sigma_uu(nu, nu);
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) sigma_kk(i, j) = d.covariance(known[i], known[j]);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nk; ++j) sigma_uk(i, j) = d.covariance(unknown[i], known[j]);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nu; ++j) sigma_uu(i, j) = d.covariance(unknown[i], unknown[j]);

  const Eigen::LLT<Eigen::MatrixXd> kk(sigma_kk);
  const Eigen::MatrixXd gain = kk.solve(sigma_uk.transpose()).transpose();  // Sigma_UK Sigma_KK^-1

  out.mean_unknown.resize(nu);
  if (nu > 0) {
    Eigen::VectorXd mean_u(nu);
    for (int i = 0; i < nu; ++i) mean_u(i) = d.mean(unknown[i]);
    out.mean_unknown = mean_u + gain * (alpha - mean_k);
    out.covariance_unknown = sigma_uu - gain * sigma_uk.transpose();
  } else {
    out.covariance_unknown.resize(0, 0);
  }

  for (int i = 0; i < nk; ++i) out.full_mean[known[static_cast<size_t>(i)]] = alpha(i);
  for (int i = 0; i < nu; ++i) out.full_mean[unknown[static_cast<size_t>(i)]] = out.mean_unknown(i);
  return out;
}

StructuredGaussian random_model(GridShape shape, int radius, bool scaled, uint64_t seed) {
  NormalSampler rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * rng.next_uniform_open();
  };

  CholeskyMaps maps(shape, canonical_pattern(radius));
  maps.scaled = scaled;
  for (double& v : maps.log_diag.values) v = uniform(-0.4, 0.4);
  for (GridMap& m : maps.off_diag)
    for (double& v : m.values) v = uniform(-0.5, 0.5);
  if (scaled) {
    maps.diag_scale_a = uniform(-0.3, 0.3);
    maps.diag_scale_b = uniform(-1.5, -0.5);
    for (double& c : maps.off_diag_scale_c) c = uniform(0.1, 0.5);
  }

  GridMap mean(shape);
  for (double& v : mean.values) v = uniform(-1.0, 1.0);
  return {std::move(mean), std::move(maps)};
}

namespace {

double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-30);
}

double rel_error_inf(const std::vector<double>& got, const Eigen::VectorXd& want) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < want.size(); ++i) {
    num = std::max(num, std::abs(got[static_cast<size_t>(i)] - want(i)));
    den = std::max(den, std::abs(want(i)));
  }
  return num / std::max(den, 1e-30);
}

}  // namespace

std::vector<CrossCheckFailure> run_cross_checks(const CrossCheckOptions& options) {
  std::vector<CrossCheckFailure> failures;
  auto record = [&failures](uint64_t seed, const std::string& check, double err, double tol) {
    if (!(err < tol)) failures.push_back({seed, check, err});
  };

  for (uint64_t seed = 0; seed < static_cast<uint64_t>(options.seeds); ++seed) {
    NormalSampler rng(seed * 7919 + 13);
    auto uniform_int = [&rng](int lo, int hi) {
      return lo + static_cast<int>(rng.next_uniform_open() * (hi - lo + 1)) % (hi - lo + 1);
    };
    const GridShape shape(uniform_int(options.min_size.height, options.max_size.height),
                          uniform_int(options.min_size.width, options.max_size.width));
    const int radius = (seed % 2 == 0) ? 1 : 2;
    const bool scaled = (seed % 4) >= 2;
    const StructuredGaussian model = random_model(shape, radius, scaled, seed);
    const DenseGaussian dense = assemble_dense(model);
    const int n = shape.pixels();

    // log density
    GridMap d(shape);
    for (double& v : d.values) v = rng.next();
    record(seed, "log_density", rel_error(log_density(model, d), dense_log_density(dense, d)),
           options.tolerance);

    // precision apply
    GridMap x(shape);
    for (double& v : x.values) v = rng.next();
    const GridMap lambda_x = apply({model.chol, Direction::precision}, x);
    const Eigen::VectorXd want_lambda_x =
        dense.precision * Eigen::Map<const Eigen::VectorXd>(x.values.data(), n);
    record(seed, "apply_precision", rel_error_inf(lambda_x.values, want_lambda_x),
           options.tolerance);

    // covariance row
    const int pixel = uniform_int(0, n - 1);
    const GridMap row = covariance_row(model, pixel);
    record(seed, "covariance_row", rel_error_inf(row.values, dense.covariance.col(pixel)),
           options.tolerance);

    // conditional mean, random mask with at least one known and one unknown
    PixelMask mask(shape);
    int known = 0;
    for (int i = 0; i < n; ++i) {
      mask.known[static_cast<size_t>(i)] = rng.next_uniform_open() < 0.25 ? 1 : 0;
      known += mask.known[static_cast<size_t>(i)];
    }
    if (known == 0) mask.known[0] = 1;
    if (known == n) mask.known[static_cast<size_t>(n - 1)] = 0;
    GridMap alpha(shape);
    for (double& v : alpha.values) v = rng.next();
    const Conditioning cond{mask, alpha};
    const GridMap cm = conditional_mean(model, cond, 1e-12);
    const DenseConditional dc = dense_conditional(dense, cond);
    record(seed, "conditional_mean",
           rel_error_inf(cm.values,
                         Eigen::Map<const Eigen::VectorXd>(dc.full_mean.values.data(), n)),
           options.tolerance);

    // Matheron precision-form identity on the same mask:
    //   Sigma_UK Sigma_KK^{-1} = -Lambda_UU^{-1} Lambda_UK
    const PrecisionBlocks blocks = assemble_precision_blocks(model.chol, mask);
    const int nu = static_cast<int>(blocks.unknown_index.size());
    const int nk = static_cast<int>(blocks.known_index.size());
    Eigen::MatrixXd lambda_uu = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd lambda_uk = Eigen::MatrixXd::Zero(nu, nk);
    for (int r = 0; r < nu; ++r) {
      for (const auto& [c, v] : blocks.uu.entries[static_cast<size_t>(r)]) lambda_uu(r, c) = v;
      for (const auto& [c, v] : blocks.uk.entries[static_cast<size_t>(r)]) lambda_uk(r, c) = v;
    }
    Eigen::MatrixXd sigma_uk(nu, nk), sigma_kk(nk, nk);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nk; ++j)
        sigma_uk(i, j) = dense.covariance(blocks.unknown_index[i], blocks.known_index[j]);
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < nk; ++j)
        sigma_kk(i, j) = dense.covariance(blocks.known_index[i], blocks.known_index[j]);
    const Eigen::MatrixXd lhs = sigma_kk.llt().solve(sigma_uk.transpose()).transpose();
    const Eigen::MatrixXd rhs = -lambda_uu.llt().solve(lambda_uk);
    const double err = (lhs - rhs).cwiseAbs().maxCoeff() /
                       std::max(rhs.cwiseAbs().maxCoeff(), 1e-30);
    record(seed, "matheron_precision_identity", err, options.tolerance);
  }
  return failures;
}

}  // namespace gmrf
