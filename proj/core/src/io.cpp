#include "gmrf/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gmrf/errors.hpp"

namespace gmrf {

namespace {

constexpr uint16_t kGmapVersion = 1;
constexpr int kCsvPixelCap = 4096;

void put_u16(std::ostream& os, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

// Payload values are packed to little-endian bytes explicitly, so the format
// is host-endian independent.
void put_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  const uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

void write_gmap(const std::filesystem::path& path, const std::vector<GridMap>& channels,
                Dtype dtype) {
  if (channels.empty()) throw std::invalid_argument("write_gmap: no channels");
  const GridShape shape = channels.front().shape;
  for (const GridMap& c : channels)
    if (c.shape != shape) throw std::invalid_argument("write_gmap: channel shape mismatch");

  std::ofstream os = open_out(path, std::ios::binary);
  os.write("GMAP", 4);
  put_u16(os, kGmapVersion);
  put_u16(os, static_cast<uint16_t>(dtype));
  put_u32(os, static_cast<uint32_t>(shape.height));
  put_u32(os, static_cast<uint32_t>(shape.width));
  put_u32(os, static_cast<uint32_t>(channels.size()));
  for (const GridMap& c : channels) {
    for (double v : c.values) {
      switch (dtype) {
        case Dtype::f32:
          put_f32(os, static_cast<float>(v));
          break;
        case Dtype::f64:
          put_f64(os, v);
          break;
        case Dtype::u8:
          os.put(static_cast<char>(static_cast<unsigned char>(v != 0.0 ? std::min(255.0, v) : 0)));
          break;
      }
    }
  }
  if (!os) throw std::runtime_error("write_gmap: write failed: " + path.string());
}

GmapContents read_gmap(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GMAP", 4) != 0)
    throw std::runtime_error("read_gmap: bad magic in " + path.string());
  const uint16_t version = get_u16(is);
  if (version != kGmapVersion)
    throw std::runtime_error("read_gmap: unsupported version in " + path.string());
  const uint16_t dtype_raw = get_u16(is);
  if (dtype_raw < 1 || dtype_raw > 3)
    throw std::runtime_error("read_gmap: unknown dtype in " + path.string());
  const auto dtype = static_cast<Dtype>(dtype_raw);
  const int height = static_cast<int>(get_u32(is));
  const int width = static_cast<int>(get_u32(is));
  const int channels = static_cast<int>(get_u32(is));
  if (!is || height < 1 || width < 1 || channels < 1)
    throw std::runtime_error("read_gmap: malformed header in " + path.string());

  GmapContents out;
  out.shape = GridShape(height, width);
  out.dtype = dtype;
  for (int c = 0; c < channels; ++c) {
    GridMap m(out.shape);
    for (double& v : m.values) {
      switch (dtype) {
        case Dtype::f32:
          v = static_cast<double>(get_f32(is));
          break;
        case Dtype::f64:
          v = get_f64(is);
          break;
        case Dtype::u8:
          v = static_cast<double>(static_cast<unsigned char>(is.get()));
          break;
      }
    }
    out.channels.push_back(std::move(m));
  }
  if (!is) throw std::runtime_error("read_gmap: truncated payload in " + path.string());
  return out;
}

void write_gmap(const std::filesystem::path& path, const GridMap& map, Dtype dtype) {
  write_gmap(path, std::vector<GridMap>{map}, dtype);
}

GridMap read_gmap_map(const std::filesystem::path& path) {
  GmapContents contents = read_gmap(path);
  if (contents.channels.size() != 1)
    throw std::runtime_error("read_gmap_map: expected a single channel in " + path.string());
  return std::move(contents.channels.front());
}

SampleBundle read_gmap_bundle(const std::filesystem::path& path) {
  GmapContents contents = read_gmap(path);
  SampleBundle bundle(contents.shape, static_cast<int>(contents.channels.size()));
  for (size_t s = 0; s < contents.channels.size(); ++s)
    bundle[static_cast<int>(s)] = std::move(contents.channels[s]);
  bundle.validate();
  return bundle;
}

void write_mask(const std::filesystem::path& path, const PixelMask& mask) {
  GridMap m(mask.shape);
  for (int i = 0; i < mask.shape.pixels(); ++i) m[i] = mask.is_known(i) ? 1.0 : 0.0;
  write_gmap(path, m, Dtype::u8);
}

PixelMask read_mask(const std::filesystem::path& path) {
  const GridMap m = read_gmap_map(path);
  PixelMask mask(m.shape);
  for (int i = 0; i < m.size(); ++i) mask.known[static_cast<size_t>(i)] = m[i] != 0.0 ? 1 : 0;
  return mask;
}

void write_csv(const std::filesystem::path& path, const GridMap& map) {
  if (map.size() > kCsvPixelCap)
    throw CapacityError("write_csv: CSV accepted only for maps with <= 4096 pixels");
  std::ofstream os = open_out(path, std::ios::out);
  os.precision(17);
  for (int y = 0; y < map.shape.height; ++y) {
    for (int x = 0; x < map.shape.width; ++x) {
      if (x > 0) os << ',';
      os << map.at(y, x);
    }
    os << '\n';
  }
}

GridMap read_csv(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, std::ios::in);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_csv: empty file " + path.string());
  const size_t width = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != width) throw std::runtime_error("read_csv: ragged rows in " + path.string());
  GridShape shape(static_cast<int>(rows.size()), static_cast<int>(width));
  if (shape.pixels() > kCsvPixelCap)
    throw CapacityError("read_csv: CSV accepted only for maps with <= 4096 pixels");
  GridMap map(shape);
  for (int y = 0; y < shape.height; ++y)
    for (int x = 0; x < shape.width; ++x) map.at(y, x) = rows[static_cast<size_t>(y)][static_cast<size_t>(x)];
  return map;
}

void write_pgm(const std::filesystem::path& path, const GridMap& map, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("write_pgm: needs lo < hi");
  std::ofstream os = open_out(path, std::ios::binary);
  os << "P5\n" << map.shape.width << " " << map.shape.height << "\n255\n";
  for (double v : map.values) {
    const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
}

void write_model(const std::string& prefix, const StructuredGaussian& g, Dtype dtype) {
  write_gmap(prefix + ".mean.gmap", g.mean, dtype);
  std::vector<GridMap> channels;
  channels.reserve(1 + g.chol.off_diag.size());
  channels.push_back(g.chol.log_diag);
  for (const GridMap& m : g.chol.off_diag) channels.push_back(m);
  write_gmap(prefix + ".chol.gmap", channels, dtype);

  nlohmann::json sidecar{
      {"schema_version", 1},
      {"radius", g.chol.pattern.radius()},
      {"scaled", g.chol.scaled},
      {"diag_scale_a", g.chol.diag_scale_a},
      {"diag_scale_b", g.chol.diag_scale_b},
      {"off_diag_scale_c", g.chol.off_diag_scale_c},
  };
  std::ofstream os = open_out(prefix + ".json", std::ios::out);
  os << sidecar.dump(2) << "\n";
}

StructuredGaussian read_model(const std::string& prefix) {
  GridMap mean = read_gmap_map(prefix + ".mean.gmap");
  GmapContents chol_channels = read_gmap(prefix + ".chol.gmap");

  std::ifstream is = open_in(prefix + ".json", std::ios::in);
  nlohmann::json sidecar = nlohmann::json::parse(is);

  const int radius = sidecar.at("radius").get<int>();
  CholeskyMaps maps(mean.shape, canonical_pattern(radius));
  if (static_cast<int>(chol_channels.channels.size()) != 1 + maps.pattern.size())
    throw std::runtime_error("read_model: chol channel count does not match radius");
  maps.log_diag = std::move(chol_channels.channels[0]);
  for (int l = 0; l < maps.pattern.size(); ++l)
    maps.off_diag[static_cast<size_t>(l)] = std::move(chol_channels.channels[static_cast<size_t>(l) + 1]);
  maps.scaled = sidecar.at("scaled").get<bool>();
  maps.diag_scale_a = sidecar.at("diag_scale_a").get<double>();
  maps.diag_scale_b = sidecar.at("diag_scale_b").get<double>();
  maps.off_diag_scale_c = sidecar.at("off_diag_scale_c").get<std::vector<double>>();
  if (static_cast<int>(maps.off_diag_scale_c.size()) != maps.pattern.size())
    throw std::runtime_error("read_model: off_diag_scale_c length mismatch");

  StructuredGaussian g(std::move(mean), std::move(maps));
  g.chol.validate();
  return g;
}

std::string fit_report_to_json(const FitReport& report) {
  nlohmann::json j{
      {"schema_version", 1},
      {"final_nll", report.final_nll},
      {"iterations", report.iterations_used},
      {"gradient_norm", report.gradient_norm},
      {"trace", report.nll_trace},
  };
  return j.dump(2);
}

void write_fit_report(const std::filesystem::path& path, const FitReport& report) {
  std::ofstream os = open_out(path, std::ios::out);
  os << fit_report_to_json(report) << "\n";
}

}  // namespace gmrf
