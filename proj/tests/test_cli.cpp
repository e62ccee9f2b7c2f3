// End-to-end tests driving the installed CLI binary as a subprocess.
// The binary path arrives via GMRF_CLI_BIN (set by CTest).

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "gmrf/io.hpp"
#include "gmrf/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_bin() {
  const char* env = std::getenv("GMRF_CLI_BIN");
  REQUIRE_MESSAGE(env != nullptr, "GMRF_CLI_BIN must point at the gmrf binary");
  return env;
}

int run(const std::string& args) {
  const std::string cmd = cli_bin() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

json load_json(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  return json::parse(is);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gmrf_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("fit then logprob reproduces the reported final NLL") {
  TempDir tmp;
  REQUIRE(run("synth --kind gmrf --size 6x6 --count 48 --seed 3 --out " + (tmp / "truth")) == 0);
  REQUIRE(run("fit --samples " + (tmp / "truth.samples.gmap") +
              " --radius 1 --iters 800 --seed 1 --report " + (tmp / "report.json") + " --out " +
              (tmp / "fitted")) == 0);
  REQUIRE(run("logprob --model " + (tmp / "fitted") + " --samples " +
              (tmp / "truth.samples.gmap") + " --out " + (tmp / "lp.json")) == 0);

  const double final_nll = load_json(tmp / "report.json").at("final_nll").get<double>();
  const double total = load_json(tmp / "lp.json").at("total_log_density").get<double>();
  CHECK(std::abs(-total - final_nll) / std::abs(final_nll) < 1e-9);
}

TEST_CASE("sampling with the same seed is byte identical") {
  TempDir tmp;
  REQUIRE(run("synth --kind gmrf --size 5x5 --count 4 --seed 9 --out " + (tmp / "m")) == 0);
  REQUIRE(run("sample --model " + (tmp / "m") + " --count 4 --seed 7 --jacobi-iters 100 --out " +
              (tmp / "a.gmap")) == 0);
  REQUIRE(run("sample --model " + (tmp / "m") + " --count 4 --seed 7 --jacobi-iters 100 --out " +
              (tmp / "b.gmap")) == 0);
  CHECK(slurp(tmp / "a.gmap") == slurp(tmp / "b.gmap"));

  REQUIRE(run("sample --model " + (tmp / "m") + " --count 4 --seed 8 --jacobi-iters 100 --out " +
              (tmp / "c.gmap")) == 0);
  CHECK(slurp(tmp / "a.gmap") != slurp(tmp / "c.gmap"));
}

TEST_CASE("introspect renders a valid binary P5 PGM") {
  TempDir tmp;
  REQUIRE(run("synth --kind gmrf --size 6x6 --count 2 --seed 5 --out " + (tmp / "m")) == 0);
  REQUIRE(run("introspect --model " + (tmp / "m") + " --pixel 3,3 --out " + (tmp / "row.pgm")) ==
          0);

  const std::vector<char> pgm = slurp(tmp / "row.pgm");
  REQUIRE(pgm.size() > 2);
  CHECK(pgm[0] == 'P');
  CHECK(pgm[1] == '5');
  std::stringstream header(std::string(pgm.begin(), pgm.end()));
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  header >> magic >> w >> h >> maxval;
  CHECK(w == 6);
  CHECK(h == 6);
  CHECK(maxval == 255);
  const size_t header_len = static_cast<size_t>(header.tellg()) + 1;  // single separator byte
  CHECK(pgm.size() == header_len + 36);

  // split-sign variant writes the positive/negative pair
  REQUIRE(run("introspect --model " + (tmp / "m") + " --pixel 0,0 --split-sign --out " +
              (tmp / "row")) == 0);
  CHECK(fs::exists(tmp.path / "row.pos.pgm"));
  CHECK(fs::exists(tmp.path / "row.neg.pgm"));
}

TEST_CASE("oracle-check exits zero when all cross checks pass") {
  CHECK(run("oracle-check --seeds 8 --max-size 6x6") == 0);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("sample --model nowhere") == 2);      // missing required --out
  CHECK(run("frobnicate") == 2);                  // unknown subcommand
  CHECK(run("sample --bogus-flag x") == 2);       // unknown flag
}

TEST_CASE("numerical/input failures exit with code 1") {
  TempDir tmp;
  REQUIRE(run("synth --kind gmrf --size 4x4 --count 2 --seed 1 --out " + (tmp / "m")) == 0);
  REQUIRE(run("synth --kind gmrf --size 5x5 --count 2 --seed 1 --out " + (tmp / "other")) == 0);
  // samples of the wrong shape for the model
  CHECK(run("logprob --model " + (tmp / "m") + " --samples " + (tmp / "other.samples.gmap")) == 1);
}

TEST_CASE("eval writes the JSON report and CSV summary") {
  TempDir tmp;
  gmrf::NormalSampler rng(11);
  gmrf::GridMap gt({6, 6}), pred({6, 6}), unc({6, 6});
  for (int i = 0; i < 36; ++i) {
    gt[i] = 3.0 + rng.next_uniform_open() * 5.0;
    pred[i] = gt[i] + 0.3 * rng.next();
    unc[i] = rng.next_uniform_open();
  }
  gmrf::write_gmap(tmp / "gt.gmap", gt);
  gmrf::write_gmap(tmp / "pred.gmap", pred);
  gmrf::write_gmap(tmp / "unc.gmap", unc);

  REQUIRE(run("eval --pred " + (tmp / "pred.gmap") + " --gt " + (tmp / "gt.gmap") +
              " --uncertainty " + (tmp / "unc.gmap") + " --report " + (tmp / "eval.json") +
              " --csv " + (tmp / "eval.csv")) == 0);

  const json report = load_json(tmp / "eval.json");
  CHECK(report.at("schema_version") == 1);
  REQUIRE(report.at("rows").size() == 1);
  const json& row = report.at("rows")[0];
  for (const char* key : {"absrel", "rmse", "a1", "rmse_ause", "rmse_aurg", "a1_ause"})
    CHECK(row.contains(key));
  CHECK(row.at("a1").get<double>() > 0.5);  // mild noise keeps most ratios under 1.25

  std::ifstream csv(tmp / "eval.csv");
  std::string header_line;
  std::getline(csv, header_line);
  CHECK(header_line.find("absrel") == 0);

  // perfect self-prediction yields zero errors through the same path
  REQUIRE(run("eval --pred " + (tmp / "gt.gmap") + " --gt " + (tmp / "gt.gmap") +
              " --uncertainty " + (tmp / "unc.gmap") + " --report " + (tmp / "self.json")) == 0);
  const json self_row = load_json(tmp / "self.json").at("rows")[0];
  CHECK(self_row.at("absrel").get<double>() == 0.0);
  CHECK(self_row.at("a1").get<double>() == 1.0);
}

TEST_CASE("bench reports near-linear scaling on small grids") {
  TempDir tmp;
  REQUIRE(run("bench --sizes 16x16,32x32 --jacobi-iters 25 --report " + (tmp / "bench.json")) ==
          0);
  const json report = load_json(tmp / "bench.json");
  CHECK(report.at("entries").size() == 2);
  CHECK(report.at("ratios").size() == 1);
  CHECK(report.contains("max_per_pixel_doubling_factor"));
  CHECK(report.contains("extrapolated_seconds_per_sample_192x640_J1000"));
}
