// Command line front end for the structured-Gaussian grid library:
// fitting, sampling, conditioning, introspection, evaluation, synthetic
// data generation, oracle verification and benchmarking.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gmrf/conditioning.hpp"
#include "gmrf/distribution.hpp"
#include "gmrf/errors.hpp"
#include "gmrf/fitting.hpp"
#include "gmrf/io.hpp"
#include "gmrf/linops.hpp"
#include "gmrf/metrics.hpp"
#include "gmrf/oracle.hpp"
#include "gmrf/random.hpp"
#include "gmrf/synth.hpp"

namespace {

using nlohmann::json;

gmrf::GridShape parse_size(const std::string& text) {
  const auto sep = text.find('x');
  if (sep == std::string::npos)
    throw CLI::ValidationError("size", "expected HxW, e.g. 32x32: " + text);
  return gmrf::GridShape(std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 1)));
}

std::pair<int, int> parse_pixel(const std::string& text) {
  const auto sep = text.find(',');
  if (sep == std::string::npos)
    throw CLI::ValidationError("pixel", "expected y,x: " + text);
  return {std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 1))};
}

gmrf::Dtype parse_precision(const std::string& text) {
  if (text == "f32") return gmrf::Dtype::f32;
  if (text == "f64") return gmrf::Dtype::f64;
  throw CLI::ValidationError("precision", "expected f32 or f64");
}

void write_map_as(const std::filesystem::path& out, const gmrf::GridMap& map,
                  const std::string& format, gmrf::Dtype dtype) {
  if (format == "gmap") {
    gmrf::write_gmap(out, map, dtype);
  } else if (format == "csv") {
    gmrf::write_csv(out, map);
  } else if (format == "pgm") {
    double lo = map.values.front(), hi = lo;
    for (double v : map.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) hi = lo + 1.0;
    gmrf::write_pgm(out, map, lo, hi);
  } else {
    throw CLI::ValidationError("format", "expected gmap, csv or pgm");
  }
}

struct CommonFlags {
  uint64_t seed = 0;
  std::string out;
  std::string format = "gmap";
  std::string precision = "f64";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool out_required = true) {
  cmd->add_option("--seed", flags.seed, "RNG seed");
  auto* out = cmd->add_option("--out", flags.out, "output path or prefix");
  if (out_required) out->required();
  cmd->add_option("--format", flags.format, "map output format")
      ->check(CLI::IsMember({"gmap", "csv", "pgm"}));
  cmd->add_option("--precision", flags.precision, "floating precision for gmap payloads")
      ->check(CLI::IsMember({"f32", "f64"}));
}

int run_fit(const std::string& samples_path, int radius, bool diagonal_only, bool scaled,
            bool no_fit_mean, int iterations, double learning_rate, const std::string& init,
            const std::string& report_path, const CommonFlags& flags) {
  const gmrf::SampleBundle bundle = gmrf::read_gmap_bundle(samples_path);

  gmrf::FitConfig config;
  config.diagonal_only = diagonal_only;
  config.scaled_parameterization = scaled;
  config.fit_mean = !no_fit_mean;
  config.max_iterations = iterations;
  config.learning_rate = learning_rate;
  config.init = init == "identity" ? gmrf::FitInit::identity : gmrf::FitInit::small_offdiag;

  const auto [model, report] = gmrf::fit(bundle, gmrf::canonical_pattern(radius), config, flags.seed);
  gmrf::write_model(flags.out, model, parse_precision(flags.precision));
  if (!report_path.empty()) gmrf::write_fit_report(report_path, report);

  std::cout << "fit: final_nll=" << report.final_nll << " iterations=" << report.iterations_used
            << " model=" << flags.out << "\n";
  return 0;
}

int run_sample(const std::string& model_prefix, int count, int jacobi_iters,
               const CommonFlags& flags) {
  const gmrf::StructuredGaussian model = gmrf::read_model(model_prefix);
  const gmrf::SampleBundle bundle = gmrf::sample(model, count, flags.seed, jacobi_iters);
  if (flags.format == "gmap") {
    gmrf::write_gmap(flags.out, bundle.maps, parse_precision(flags.precision));
  } else if (count == 1) {
    write_map_as(flags.out, bundle[0], flags.format, parse_precision(flags.precision));
  } else {
    throw CLI::ValidationError("format", "csv/pgm sampling output requires --count 1");
  }
  std::cout << "sample: wrote " << count << " draw(s) to " << flags.out << "\n";
  return 0;
}

int run_condition(const std::string& model_prefix, const std::string& mask_path,
                  const std::string& values_path, int count, int jacobi_iters, double tol,
                  bool mean_only, const CommonFlags& flags) {
  const gmrf::StructuredGaussian model = gmrf::read_model(model_prefix);
  const gmrf::PixelMask mask = gmrf::read_mask(mask_path);
  const gmrf::GridMap values = gmrf::read_gmap_map(values_path);
  const gmrf::Conditioning cond{mask, values};

  if (mean_only) {
    const gmrf::GridMap mean = gmrf::conditional_mean(model, cond, tol);
    write_map_as(flags.out, mean, flags.format, parse_precision(flags.precision));
    std::cout << "condition: wrote conditional mean to " << flags.out << "\n";
  } else {
    const gmrf::SampleBundle bundle =
        gmrf::conditional_sample(model, cond, count, flags.seed, jacobi_iters, tol);
    gmrf::write_gmap(flags.out, bundle.maps, parse_precision(flags.precision));
    std::cout << "condition: wrote " << count << " conditional draw(s) to " << flags.out << "\n";
  }
  return 0;
}

int run_logprob(const std::string& model_prefix, const std::string& samples_path,
                const CommonFlags& flags) {
  const gmrf::StructuredGaussian model = gmrf::read_model(model_prefix);
  const gmrf::SampleBundle bundle = gmrf::read_gmap_bundle(samples_path);

  json per_sample = json::array();
  double total = 0.0;
  for (int s = 0; s < bundle.count(); ++s) {
    const double value = gmrf::log_density(model, bundle[s]);
    per_sample.push_back(value);
    total += value;
  }
  const json out{{"schema_version", 1},
                 {"count", bundle.count()},
                 {"total_log_density", total},
                 {"per_sample", per_sample}};
  if (flags.out.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream os(flags.out);
    os << out.dump(2) << "\n";
    std::cout << "logprob: total_log_density=" << total << " report=" << flags.out << "\n";
  }
  return 0;
}

int run_introspect(const std::string& model_prefix, const std::string& pixel_text,
                   const std::string& render, int jacobi_iters, bool split_sign,
                   const CommonFlags& flags) {
  const gmrf::StructuredGaussian model = gmrf::read_model(model_prefix);
  const auto [y, x] = parse_pixel(pixel_text);
  if (!model.shape().contains(y, x))
    throw std::invalid_argument("introspect: pixel outside the grid");
  const gmrf::GridMap row = gmrf::covariance_row(model, model.shape().index(y, x), jacobi_iters);

  if (render == "pgm") {
    const gmrf::GridMap vis = gmrf::visualize_covariance_row(row);
    if (split_sign) {
      gmrf::GridMap pos(vis.shape), neg(vis.shape);
      for (int i = 0; i < vis.size(); ++i) {
        pos[i] = std::max(vis[i], 0.0);
        neg[i] = std::max(-vis[i], 0.0);
      }
      gmrf::write_pgm(flags.out + ".pos.pgm", pos, 0.0, 0.05);
      gmrf::write_pgm(flags.out + ".neg.pgm", neg, 0.0, 0.05);
      std::cout << "introspect: wrote " << flags.out << ".{pos,neg}.pgm\n";
    } else {
      gmrf::write_pgm(flags.out, vis, -0.05, 0.05);
      std::cout << "introspect: wrote " << flags.out << "\n";
    }
  } else {
    write_map_as(flags.out, row, render, parse_precision(flags.precision));
    std::cout << "introspect: wrote raw covariance row to " << flags.out << "\n";
  }
  return 0;
}

int run_synth(const std::string& kind, const std::string& size_text, int count, int radius,
              double offdiag_mag, double logdiag_spread, double mean_amp, bool scaled,
              double length_scale, double amplitude, double nugget, double std_value,
              const CommonFlags& flags) {
  gmrf::SynthSpec spec;
  spec.shape = parse_size(size_text);
  spec.count = count;
  spec.seed = flags.seed;
  if (kind == "gmrf") {
    gmrf::GroundTruthGmrfParams p;
    p.radius = radius;
    p.off_diag_magnitude = offdiag_mag;
    p.log_diag_spread = logdiag_spread;
    p.mean_amplitude = mean_amp;
    p.scaled = scaled;
    spec.kind = p;
  } else if (kind == "smooth") {
    spec.kind = gmrf::SmoothFieldParams{length_scale, amplitude, nugget};
  } else if (kind == "diagonal") {
    spec.kind = gmrf::DiagonalNoiseParams{gmrf::GridMap(spec.shape),
                                          gmrf::GridMap(spec.shape, std_value)};
  } else {
    throw CLI::ValidationError("kind", "expected gmrf, smooth or diagonal");
  }

  const gmrf::SynthResult result = gmrf::generate(spec);
  const gmrf::Dtype dtype = parse_precision(flags.precision);
  gmrf::write_gmap(flags.out + ".samples.gmap", result.bundle.maps, dtype);
  std::cout << "synth: wrote " << count << " sample(s) to " << flags.out << ".samples.gmap\n";
  if (result.ground_truth) {
    gmrf::write_model(flags.out, *result.ground_truth, dtype);
    std::cout << "synth: wrote generating model with prefix " << flags.out << "\n";
  }
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& uncertainty_path, const std::string& valid_path,
             const std::string& report_path, const std::string& csv_path) {
  gmrf::EvalPair pair;
  pair.prediction = gmrf::read_gmap_map(pred_path);
  pair.ground_truth = gmrf::read_gmap_map(gt_path);
  pair.uncertainty = gmrf::read_gmap_map(uncertainty_path);
  if (!valid_path.empty()) {
    const gmrf::PixelMask mask = gmrf::read_mask(valid_path);
    pair.valid = mask.known;
  }

  const gmrf::DepthMetrics depth = gmrf::depth_metrics(pair);
  const std::vector<double> fractions = gmrf::default_fraction_grid();

  json row{{"prediction", pred_path},
           {"absrel", depth.absrel},
           {"rmse", depth.rmse},
           {"a1", depth.a1}};
  for (auto [kind, name] : {std::pair{gmrf::MetricKind::absrel, "absrel"},
                            std::pair{gmrf::MetricKind::rmse, "rmse"},
                            std::pair{gmrf::MetricKind::a1, "a1"}}) {
    const gmrf::SparsificationResult sr = gmrf::sparsification_curves(pair, kind, fractions);
    row[std::string(name) + "_ause"] = sr.ause;
    row[std::string(name) + "_aurg"] = sr.aurg;
  }

  const json report{{"schema_version", 1}, {"rows", json::array({row})}};
  std::ofstream os(report_path);
  if (!os) throw std::runtime_error("eval: cannot write report " + report_path);
  os << report.dump(2) << "\n";

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "absrel,rmse,a1,absrel_ause,absrel_aurg,rmse_ause,rmse_aurg,a1_ause,a1_aurg\n";
    csv << row["absrel"].get<double>() << "," << row["rmse"].get<double>() << ","
        << row["a1"].get<double>() << "," << row["absrel_ause"].get<double>() << ","
        << row["absrel_aurg"].get<double>() << "," << row["rmse_ause"].get<double>() << ","
        << row["rmse_aurg"].get<double>() << "," << row["a1_ause"].get<double>() << ","
        << row["a1_aurg"].get<double>() << "\n";
  }
  std::cout << "eval: absrel=" << depth.absrel << " rmse=" << depth.rmse << " a1=" << depth.a1
            << " report=" << report_path << "\n";
  return 0;
}

int run_oracle_check(int seeds, const std::string& max_size_text, double tolerance) {
  gmrf::CrossCheckOptions options;
  options.seeds = seeds;
  options.max_size = parse_size(max_size_text);
  options.tolerance = tolerance;
  const auto failures = gmrf::run_cross_checks(options);
  if (failures.empty()) {
    std::cout << "oracle-check: " << seeds << " seeded instances passed at tolerance "
              << tolerance << "\n";
    return 0;
  }
  for (const auto& f : failures)
    std::cerr << "oracle-check FAILED seed=" << f.seed << " check=" << f.check
              << " error=" << f.error << "\n";
  return 1;
}

int run_bench(const std::string& sizes_text, int jacobi_iters, const std::string& report_path) {
  std::vector<gmrf::GridShape> sizes;
  std::stringstream ss(sizes_text);
  std::string token;
  while (std::getline(ss, token, ',')) sizes.push_back(parse_size(token));
  if (sizes.empty()) throw CLI::ValidationError("sizes", "no sizes given");

  json entries = json::array();
  std::vector<double> per_sample_seconds;
  for (const gmrf::GridShape& shape : sizes) {
    const int n = shape.pixels();
    // enough samples that each size measures a few hundred milliseconds
    const int count = std::max(2, (1 << 22) / std::max(1, n * jacobi_iters / 100));

    gmrf::CholeskyMaps maps(shape, gmrf::canonical_pattern(1));
    gmrf::NormalSampler rng(17);
    for (double& v : maps.log_diag.values) v = 0.1 * rng.next();
    for (gmrf::GridMap& m : maps.off_diag)
      for (double& v : m.values) v = 0.2 * rng.next();
    const gmrf::SampleBundle noise = gmrf::normal_bundle(shape, count, 23);

    const auto start = std::chrono::steady_clock::now();
    const gmrf::SampleBundle out = gmrf::jacobi_solve_Lt(maps, noise, jacobi_iters);
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(stop - start).count();
    const double per_sample = seconds / count;
    per_sample_seconds.push_back(per_sample);

    entries.push_back({{"height", shape.height},
                       {"width", shape.width},
                       {"pixels", n},
                       {"samples", count},
                       {"jacobi_iterations", jacobi_iters},
                       {"seconds_total", seconds},
                       {"seconds_per_sample", per_sample}});
    std::cout << "bench: " << shape.height << "x" << shape.width << " " << per_sample
              << " s/sample (" << count << " samples)\n";
  }

  json ratios = json::array();
  double worst_per_doubling = 0.0;
  for (size_t i = 1; i < per_sample_seconds.size(); ++i) {
    const double ratio = per_sample_seconds[i] / per_sample_seconds[i - 1];
    const double n_ratio = static_cast<double>(sizes[i].pixels()) / sizes[i - 1].pixels();
    // normalize to a per-doubling-of-N factor: ratio^(1/log2(n_ratio))
    const double per_doubling = std::pow(ratio, 1.0 / std::log2(n_ratio));
    worst_per_doubling = std::max(worst_per_doubling, per_doubling);
    ratios.push_back({{"from_pixels", sizes[i - 1].pixels()},
                      {"to_pixels", sizes[i].pixels()},
                      {"time_ratio", ratio},
                      {"per_pixel_doubling_factor", per_doubling}});
    std::cout << "bench: " << sizes[i - 1].pixels() << " -> " << sizes[i].pixels()
              << " pixels: time x" << ratio << " (x" << per_doubling << " per N doubling)\n";
  }

  // context: what one full-resolution (192x640) sample would cost at J=1000
  const double last_per_pixel_iter =
      per_sample_seconds.back() / (sizes.back().pixels() * static_cast<double>(jacobi_iters));
  const double extrapolated = last_per_pixel_iter * 192.0 * 640.0 * 1000.0;

  const json report{{"schema_version", 1},
                    {"entries", entries},
                    {"ratios", ratios},
                    {"max_per_pixel_doubling_factor", worst_per_doubling},
                    {"linear_scaling_bound", 2.5},
                    {"linear_scaling_ok", worst_per_doubling <= 2.5},
                    {"extrapolated_seconds_per_sample_192x640_J1000", extrapolated}};
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    os << report.dump(2) << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  std::cout << "bench: max per-N-doubling factor " << worst_per_doubling
            << (worst_per_doubling <= 2.5 ? " (within the 2.5 linear bound)\n"
                                          : " (EXCEEDS the 2.5 linear bound)\n");
  return worst_per_doubling <= 2.5 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured Gaussian distributions over image grids"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit to a sample bundle");
  CommonFlags fit_flags;
  std::string fit_samples, fit_report, fit_init = "small";
  int fit_radius = 1, fit_iters = 5000;
  double fit_lr = 1e-2;
  bool fit_diag = false, fit_scaled = false, fit_no_mean = false;
  fit_cmd->add_option("--samples", fit_samples, "training bundle (gmap)")->required();
  fit_cmd->add_option("--radius", fit_radius, "neighborhood radius")->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--diagonal-only", fit_diag, "fit a diagonal factor only");
  fit_cmd->add_flag("--scaled", fit_scaled, "use the scaled parameterization");
  fit_cmd->add_flag("--no-fit-mean", fit_no_mean, "freeze the mean at the bundle mean");
  fit_cmd->add_option("--iters", fit_iters, "maximum optimizer iterations");
  fit_cmd->add_option("--lr", fit_lr, "learning rate");
  fit_cmd->add_option("--init", fit_init, "off-diagonal init")
      ->check(CLI::IsMember({"identity", "small"}));
  fit_cmd->add_option("--report", fit_report, "write the fit report JSON here");
  add_common(fit_cmd, fit_flags);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "draw unconditional samples");
  CommonFlags sample_flags;
  std::string sample_model;
  int sample_count = 1, sample_iters = gmrf::kDefaultJacobiIterations;
  sample_cmd->add_option("--model", sample_model, "model file prefix")->required();
  sample_cmd->add_option("--count", sample_count, "number of samples");
  sample_cmd->add_option("--jacobi-iters", sample_iters, "Jacobi iterations (default 1000)");
  add_common(sample_cmd, sample_flags);

  // condition
  auto* cond_cmd = app.add_subcommand("condition", "conditional mean or samples given known pixels");
  CommonFlags cond_flags;
  std::string cond_model, cond_mask, cond_values;
  int cond_count = 1, cond_iters = gmrf::kDefaultJacobiIterations;
  double cond_tol = 1e-10;
  bool cond_mean_only = false;
  cond_cmd->add_option("--model", cond_model, "model file prefix")->required();
  cond_cmd->add_option("--mask", cond_mask, "known-pixel mask (gmap u8, 1 = known)")->required();
  cond_cmd->add_option("--values", cond_values, "known-pixel values (gmap)")->required();
  cond_cmd->add_option("--count", cond_count, "number of conditional samples");
  cond_cmd->add_option("--jacobi-iters", cond_iters, "Jacobi iterations for the joint draws");
  cond_cmd->add_option("--tol", cond_tol, "CG relative-residual tolerance");
  cond_cmd->add_flag("--mean-only", cond_mean_only, "write the conditional mean instead");
  add_common(cond_cmd, cond_flags);

  // logprob
  auto* logprob_cmd = app.add_subcommand("logprob", "log density of samples under a model");
  CommonFlags logprob_flags;
  std::string logprob_model, logprob_samples;
  logprob_cmd->add_option("--model", logprob_model, "model file prefix")->required();
  logprob_cmd->add_option("--samples", logprob_samples, "sample bundle (gmap)")->required();
  add_common(logprob_cmd, logprob_flags, /*out_required=*/false);

  // introspect
  auto* intro_cmd = app.add_subcommand("introspect", "covariance row of a pixel");
  CommonFlags intro_flags;
  std::string intro_model, intro_pixel, intro_render = "pgm";
  int intro_iters = 0;
  bool intro_split = false;
  intro_cmd->add_option("--model", intro_model, "model file prefix")->required();
  intro_cmd->add_option("--pixel", intro_pixel, "pixel as y,x")->required();
  intro_cmd->add_option("--render", intro_render, "pgm renders signed-sqrt clipped to [-0.05,0.05]")
      ->check(CLI::IsMember({"pgm", "gmap", "csv"}));
  intro_cmd->add_option("--jacobi-iters", intro_iters, "0 = exact triangular solves");
  intro_cmd->add_flag("--split-sign", intro_split, "write positive/negative PGMs side by side");
  add_common(intro_cmd, intro_flags);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic sample bundles");
  CommonFlags synth_flags;
  std::string synth_kind, synth_size = "8x8";
  int synth_count = 16, synth_radius = 1;
  double synth_offdiag = 0.3, synth_spread = 0.3, synth_mean_amp = 1.0;
  double synth_length = 2.0, synth_amp = 1.0, synth_nugget = 0.02, synth_std = 1.0;
  bool synth_scaled = false;
  synth_cmd->add_option("--kind", synth_kind, "gmrf | smooth | diagonal")->required();
  synth_cmd->add_option("--size", synth_size, "grid size HxW");
  synth_cmd->add_option("--count", synth_count, "number of samples");
  synth_cmd->add_option("--radius", synth_radius, "gmrf: neighborhood radius");
  synth_cmd->add_option("--offdiag-mag", synth_offdiag, "gmrf: off-diagonal magnitude");
  synth_cmd->add_option("--logdiag-spread", synth_spread, "gmrf: log-diagonal spread");
  synth_cmd->add_option("--mean-amp", synth_mean_amp, "gmrf: mean amplitude");
  synth_cmd->add_flag("--scaled", synth_scaled, "gmrf: scaled parameterization");
  synth_cmd->add_option("--length-scale", synth_length, "smooth: bump length scale");
  synth_cmd->add_option("--amplitude", synth_amp, "smooth: bump amplitude");
  synth_cmd->add_option("--nugget", synth_nugget, "smooth: white-noise fraction");
  synth_cmd->add_option("--std", synth_std, "diagonal: per-pixel std");
  add_common(synth_cmd, synth_flags);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "accuracy and uncertainty metrics");
  std::string eval_pred, eval_gt, eval_unc, eval_valid, eval_report, eval_csv;
  eval_cmd->add_option("--pred", eval_pred, "prediction map (gmap)")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth map (gmap)")->required();
  eval_cmd->add_option("--uncertainty", eval_unc, "uncertainty map (gmap)")->required();
  eval_cmd->add_option("--valid", eval_valid, "validity mask (gmap u8)");
  eval_cmd->add_option("--report", eval_report, "JSON report path")->required();
  eval_cmd->add_option("--csv", eval_csv, "CSV summary path");

  // oracle-check
  auto* oracle_cmd = app.add_subcommand("oracle-check", "sparse-vs-dense equivalence checks");
  int oracle_seeds = 50;
  std::string oracle_max_size = "8x8";
  double oracle_tol = 1e-8;
  oracle_cmd->add_option("--seeds", oracle_seeds, "number of seeded instances");
  oracle_cmd->add_option("--max-size", oracle_max_size, "largest grid, HxW");
  oracle_cmd->add_option("--tol", oracle_tol, "relative-error tolerance");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "sampling wall-time scaling");
  std::string bench_sizes = "32x32,64x64,128x128,256x256";
  int bench_iters = 100;
  std::string bench_report;
  bench_cmd->add_option("--sizes", bench_sizes, "comma-separated grid sizes");
  bench_cmd->add_option("--jacobi-iters", bench_iters, "fixed iteration count");
  bench_cmd->add_option("--report", bench_report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (fit_cmd->parsed())
      return run_fit(fit_samples, fit_radius, fit_diag, fit_scaled, fit_no_mean, fit_iters,
                     fit_lr, fit_init, fit_report, fit_flags);
    if (sample_cmd->parsed())
      return run_sample(sample_model, sample_count, sample_iters, sample_flags);
    if (cond_cmd->parsed())
      return run_condition(cond_model, cond_mask, cond_values, cond_count, cond_iters, cond_tol,
                           cond_mean_only, cond_flags);
    if (logprob_cmd->parsed()) return run_logprob(logprob_model, logprob_samples, logprob_flags);
    if (intro_cmd->parsed())
      return run_introspect(intro_model, intro_pixel, intro_render, intro_iters, intro_split,
                            intro_flags);
    if (synth_cmd->parsed())
      return run_synth(synth_kind, synth_size, synth_count, synth_radius, synth_offdiag,
                       synth_spread, synth_mean_amp, synth_scaled, synth_length, synth_amp,
                       synth_nugget, synth_std, synth_flags);
    if (eval_cmd->parsed())
      return run_eval(eval_pred, eval_gt, eval_unc, eval_valid, eval_report, eval_csv);
    if (oracle_cmd->parsed()) return run_oracle_check(oracle_seeds, oracle_max_size, oracle_tol);
    if (bench_cmd->parsed()) return run_bench(bench_sizes, bench_iters, bench_report);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const json diagnostic{{"schema_version", 1},
                          {"error", typeid(e).name()},
                          {"message", e.what()}};
    std::cerr << diagnostic.dump(2) << "\n";
    return 1;
  }
  return 0;
}
