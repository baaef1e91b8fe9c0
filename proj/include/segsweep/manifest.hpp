#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "segsweep/model.hpp"

namespace segsweep {

struct ManifestEntry {
    ScanRecord scan;
    // Stored as written in the manifest; relative paths resolve against
    // DatasetManifest::base_dir.
    std::string prob_path;
    std::string ref_path;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::filesystem::path base_dir;
    std::vector<ManifestEntry> scans;

    std::filesystem::path resolve(const std::string& p) const;
    std::vector<std::string> patient_ids() const;
};

// Parses the manifest document without touching the referenced rasters.
// Throws ParseError with line or field context, ValidationError for broken
// scan invariants or duplicate scan ids.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);

// parse_manifest plus existence and header checks of every raster against
// the scan geometry (headers only, pixel data is not read).
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string manifest_to_json(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Raster headers must list exactly the reviewed sections, in order, with
// dimensions matching the geometry.
void check_raster_headers(const DatasetManifest& manifest, const ManifestEntry& entry);

ProbabilityRaster load_probability(const DatasetManifest& manifest, const ManifestEntry& entry);
ReferenceMask load_reference(const DatasetManifest& manifest, const ManifestEntry& entry);

} // namespace segsweep
