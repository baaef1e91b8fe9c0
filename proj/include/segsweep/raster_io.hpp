#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "segsweep/model.hpp"

namespace segsweep {

// On-disk layout:
//   "SGSW" | version u8 (=1) | header length u32 LE | header JSON | pixel data
// The JSON header is {scan_id, dtype: "f32"|"u8", sections: [{index, rows, cols}]}.
// Pixel data follows per section, row-major, little-endian.
inline constexpr char kRasterMagic[4] = {'S', 'G', 'S', 'W'};
inline constexpr std::uint8_t kRasterVersion = 1;

enum class RasterDtype { f32, u8 };

struct RasterSectionHeader {
    int index = 0;
    int rows = 0;
    int cols = 0;

    bool operator==(const RasterSectionHeader&) const = default;
};

struct RasterHeader {
    std::string scan_id;
    RasterDtype dtype = RasterDtype::f32;
    std::vector<RasterSectionHeader> sections;
};

RasterHeader read_raster_header(const std::filesystem::path& path);

ProbabilityRaster read_probability_raster(const std::filesystem::path& path);
ReferenceMask read_reference_mask(const std::filesystem::path& path);

void write_probability_raster(const std::filesystem::path& path, const ProbabilityRaster& raster);
void write_reference_mask(const std::filesystem::path& path, const ReferenceMask& mask);

} // namespace segsweep
