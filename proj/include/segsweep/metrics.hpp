#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "segsweep/grid.hpp"
#include "segsweep/model.hpp"

namespace segsweep {

// Thresholded prediction or reference standard, one grid per reviewed
// section. `threshold` is empty for a reference mask.
struct BinaryMask {
    std::vector<int> section_indices;
    std::vector<MaskGrid> grids;
    std::optional<double> threshold;

    static BinaryMask from_reference(const ReferenceMask& ref);
};

// Pixel p is tumor iff p >= threshold. Threshold must lie in (0, 1].
MaskGrid binarize(const ProbabilityGrid& grid, double threshold);
BinaryMask binarize(const ProbabilityRaster& prob, double threshold);

struct VolumeResult {
    std::string scan_id;
    std::optional<double> threshold;
    double volume_mm3 = 0.0;
    std::vector<std::size_t> per_section_pixel_counts;
};

// volume = sum over reviewed sections of count * spacing^2 * distance.
VolumeResult tumor_volume(const BinaryMask& mask, const ScanRecord& scan);

// 2|A∩B| / (|A| + |B|); empty optional when both sections are empty.
std::optional<double> dsc(const MaskGrid& a, const MaskGrid& b);

struct ScanDsc {
    double mean = 0.0;
    double median = 0.0;
    // Empty entries mark sections where both masks are empty.
    std::vector<std::optional<double>> per_section;
    std::size_t excluded_sections = 0;
};

// Throws UndefinedError when no section has a defined DSC.
ScanDsc scan_dsc(const BinaryMask& pred, const ReferenceMask& ref);
ScanDsc scan_dsc(const BinaryMask& pred, const BinaryMask& ref);

enum class PercentConvention {
    ref_denominator,  // 100 (ref - pred) / ref
    mean_denominator, // 100 (ref - pred) / ((ref + pred) / 2)
};

// Positive values mean the prediction is smaller than the reference.
// Throws UndefinedError when the denominator is zero.
double percent_volume_difference(double v_ref, double v_pred, PercentConvention convention = PercentConvention::ref_denominator,
                                 bool signed_result = true);

std::string to_string(PercentConvention c);
PercentConvention parse_convention(const std::string& s);

} // namespace segsweep
