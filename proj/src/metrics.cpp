#include "segsweep/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "segsweep/error.hpp"

namespace segsweep {

namespace {

void check_threshold(double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("threshold must lie in (0, 1], got " + std::to_string(t));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

BinaryMask BinaryMask::from_reference(const ReferenceMask& ref) {
    return BinaryMask{ref.section_indices, ref.grids, std::nullopt};
}

MaskGrid binarize(const ProbabilityGrid& grid, double threshold) {
    check_threshold(threshold);
    MaskGrid out(grid.rows, grid.cols);
    // Compare in double so that a float pixel equal to the threshold's float
    // rounding does not flip around the boundary.
    const auto& in = grid.values;
    auto& dst = out.values;
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = static_cast<double>(in[i]) >= threshold ? 1 : 0;
    return out;
}

BinaryMask binarize(const ProbabilityRaster& prob, double threshold) {
    check_threshold(threshold);
    BinaryMask out;
    out.section_indices = prob.section_indices;
    out.threshold = threshold;
    out.grids.reserve(prob.grids.size());
    for (const auto& g : prob.grids) out.grids.push_back(binarize(g, threshold));
    return out;
}

VolumeResult tumor_volume(const BinaryMask& mask, const ScanRecord& scan) {
    if (mask.section_indices != scan.reviewed_indices || mask.grids.size() != mask.section_indices.size())
        throw ValidationError("scan " + scan.scan_id + ": mask sections do not match the reviewed sections");

    const auto distances = inter_section_distances(scan);
    VolumeResult out;
    out.scan_id = scan.scan_id;
    out.threshold = mask.threshold;
    out.per_section_pixel_counts.reserve(mask.grids.size());
    for (std::size_t k = 0; k < mask.grids.size(); ++k) {
        const auto& geo = scan.section(mask.section_indices[k]);
        const auto& g = mask.grids[k];
        if (g.rows != geo.rows || g.cols != geo.cols)
            throw ValidationError("scan " + scan.scan_id + ", section " + std::to_string(geo.index) +
                                  ": mask dimensions do not match the geometry");
        const std::size_t count = count_nonzero(g);
        out.per_section_pixel_counts.push_back(count);
        out.volume_mm3 += static_cast<double>(count) * geo.pixel_spacing_mm * geo.pixel_spacing_mm *
                          distances[k].distance_mm;
    }
    return out;
}

std::optional<double> dsc(const MaskGrid& a, const MaskGrid& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.values.size() != b.values.size())
        throw ArgumentError("dsc: mask dimensions differ");
    std::size_t na = 0, nb = 0, both = 0;
    const auto* pa = a.values.data();
    const auto* pb = b.values.data();
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const unsigned x = pa[i] != 0, y = pb[i] != 0;
        na += x;
        nb += y;
        both += x & y;
    }
    if (na + nb == 0) return std::nullopt;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

ScanDsc scan_dsc(const BinaryMask& pred, const BinaryMask& ref) {
    if (pred.section_indices != ref.section_indices || pred.grids.size() != ref.grids.size())
        throw ValidationError("scan_dsc: prediction and reference cover different sections");

    ScanDsc out;
    std::vector<double> defined;
    out.per_section.reserve(pred.grids.size());
    for (std::size_t k = 0; k < pred.grids.size(); ++k) {
        auto d = dsc(pred.grids[k], ref.grids[k]);
        out.per_section.push_back(d);
        if (d)
            defined.push_back(*d);
        else
            ++out.excluded_sections;
    }
    if (defined.empty()) throw UndefinedError("scan_dsc: no comparable sections");

    double sum = 0.0;
    for (double d : defined) sum += d;
    out.mean = sum / static_cast<double>(defined.size());
    out.median = median_of(std::move(defined));
    return out;
}

ScanDsc scan_dsc(const BinaryMask& pred, const ReferenceMask& ref) {
    return scan_dsc(pred, BinaryMask::from_reference(ref));
}

double percent_volume_difference(double v_ref, double v_pred, PercentConvention convention, bool signed_result) {
    const double denom = convention == PercentConvention::ref_denominator ? v_ref : 0.5 * (v_ref + v_pred);
    if (!(denom != 0.0) || !std::isfinite(denom)) throw UndefinedError("undefined difference: zero denominator");
    const double d = 100.0 * (v_ref - v_pred) / denom;
    return signed_result ? d : std::abs(d);
}

std::string to_string(PercentConvention c) {
    return c == PercentConvention::ref_denominator ? "ref" : "mean";
}

PercentConvention parse_convention(const std::string& s) {
    if (s == "ref") return PercentConvention::ref_denominator;
    if (s == "mean") return PercentConvention::mean_denominator;
    throw ArgumentError("unknown percent-difference convention '" + s + "' (expected ref|mean)");
}

} // namespace segsweep
