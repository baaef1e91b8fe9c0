#pragma once

#include <optional>
#include <string>
#include <vector>

#include "segsweep/grid.hpp"

namespace segsweep {

// Geometry of one CT section. In-plane pixels are square, so a single
// spacing value covers both axes.
struct SectionGeometry {
    int index = 0;
    double table_position_mm = 0.0;
    double pixel_spacing_mm = 0.0;
    int rows = 0;
    int cols = 0;

    bool operator==(const SectionGeometry&) const = default;
};

// Inclusive section-index range between two anatomic landmarks.
struct SubsetRange {
    int superior = 0;
    int inferior = 0;

    bool operator==(const SubsetRange&) const = default;
};

struct ScanRecord {
    std::string scan_id;
    std::string patient_id;
    std::vector<SectionGeometry> sections;
    std::vector<int> reviewed_indices;
    std::optional<SubsetRange> subset_range;

    // Throws ValidationError when `index` is not a section of this scan.
    const SectionGeometry& section(int index) const;
    bool has_section(int index) const;

    bool operator==(const ScanRecord&) const = default;
};

// Per reviewed section, in the order of ScanRecord::reviewed_indices.
struct ProbabilityRaster {
    std::string scan_id;
    std::vector<int> section_indices;
    std::vector<ProbabilityGrid> grids;
};

struct ReferenceMask {
    std::string scan_id;
    std::vector<int> section_indices;
    std::vector<MaskGrid> grids;
};

// Throws ValidationError naming the scan on the first broken invariant.
void check_scan_record(const ScanRecord& scan);

struct SectionDistance {
    int index = 0;
    double distance_mm = 0.0;

    bool operator==(const SectionDistance&) const = default;
};

// Each reviewed section owns the gap to the next reviewed section; the last
// one inherits the preceding gap. A scan with a single reviewed section
// needs `fallback_mm`, otherwise UndefinedError.
std::vector<SectionDistance> inter_section_distances(const ScanRecord& scan,
                                                     std::optional<double> fallback_mm = std::nullopt);

enum class ViolationKind {
    scan_geometry,
    scan_mismatch,
    section_mismatch,
    dimension_mismatch,
    probability_out_of_range,
    mask_value,
};

struct Violation {
    ViolationKind kind;
    std::string scan_id;
    std::optional<int> section_index;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool operator==(const ValidationReport&) const = default;
};

// Per-pixel violations are capped at this many entries per section, followed
// by one summary entry.
inline constexpr int kMaxPixelViolationsPerSection = 16;

ValidationReport validate_scan(const ScanRecord& scan, const ProbabilityRaster& prob, const ReferenceMask& ref);

std::string to_string(ViolationKind kind);

} // namespace segsweep
