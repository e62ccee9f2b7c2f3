#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmrf/conditioning.hpp"
#include "gmrf/distribution.hpp"
#include "gmrf/fitting.hpp"
#include "gmrf/grid.hpp"

namespace gmrf {

/// Grid-map binary format used repo-wide:
///   magic "GMAP" | u16 version (=1) | u16 dtype (1=f32, 2=f64, 3=u8)
///   | u32 height | u32 width | u32 channels | payload
/// payload is channel-major, row-major within a channel, little-endian.
enum class Dtype : uint16_t { f32 = 1, f64 = 2, u8 = 3 };

struct GmapContents {
  GridShape shape;
  Dtype dtype = Dtype::f64;
  std::vector<GridMap> channels;  // values upcast to double on read
};

void write_gmap(const std::filesystem::path& path, const std::vector<GridMap>& channels,
                Dtype dtype = Dtype::f64);
GmapContents read_gmap(const std::filesystem::path& path);

/// Single-channel conveniences; read throws if the file holds more channels.
void write_gmap(const std::filesystem::path& path, const GridMap& map, Dtype dtype = Dtype::f64);
GridMap read_gmap_map(const std::filesystem::path& path);
SampleBundle read_gmap_bundle(const std::filesystem::path& path);

/// Masks travel as u8 GMAP channels (1 = known).
void write_mask(const std::filesystem::path& path, const PixelMask& mask);
PixelMask read_mask(const std::filesystem::path& path);

/// CSV: one grid row per line. Accepted for maps with at most 4096 pixels.
void write_csv(const std::filesystem::path& path, const GridMap& map);
GridMap read_csv(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255) with a linear value mapping from [lo, hi].
void write_pgm(const std::filesystem::path& path, const GridMap& map, double lo, double hi);

/// Model files: <prefix>.mean.gmap, <prefix>.chol.gmap (log-diag channel
/// followed by the off-diagonal channels in canonical order) and
/// <prefix>.json holding radius, the scaled flag and the scaling scalars.
void write_model(const std::string& prefix, const StructuredGaussian& g,
                 Dtype dtype = Dtype::f64);
StructuredGaussian read_model(const std::string& prefix);

/// FitReport as JSON: schema_version, final_nll, iterations, gradient_norm, trace.
std::string fit_report_to_json(const FitReport& report);
void write_fit_report(const std::filesystem::path& path, const FitReport& report);

}  // namespace gmrf
