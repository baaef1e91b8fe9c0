#include "segsweep/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "segsweep/error.hpp"

namespace segsweep {

namespace {

struct GeometryProblem {
    std::optional<int> section;
    std::string message;
};

std::vector<GeometryProblem> geometry_problems(const ScanRecord& scan) {
    std::vector<GeometryProblem> out;
    auto add = [&](std::optional<int> s, std::string m) { out.push_back({s, std::move(m)}); };

    if (scan.sections.empty()) add(std::nullopt, "scan has no sections");

    std::set<int> seen;
    for (const auto& s : scan.sections) {
        if (!seen.insert(s.index).second) add(s.index, "duplicate section index " + std::to_string(s.index));
        if (!(s.pixel_spacing_mm > 0.0) || !std::isfinite(s.pixel_spacing_mm))
            add(s.index, "pixel spacing must be positive");
        if (s.rows <= 0 || s.cols <= 0) add(s.index, "rows and cols must be positive");
        if (!std::isfinite(s.table_position_mm)) add(s.index, "table position is not finite");
    }

    // Strictly monotonic in either direction.
    if (scan.sections.size() >= 2) {
        const bool increasing = scan.sections[1].table_position_mm > scan.sections[0].table_position_mm;
        for (std::size_t i = 1; i < scan.sections.size(); ++i) {
            const double step = scan.sections[i].table_position_mm - scan.sections[i - 1].table_position_mm;
            if (increasing ? !(step > 0.0) : !(step < 0.0)) {
                add(scan.sections[i].index, "table position not strictly monotonic at section " +
                                                std::to_string(scan.sections[i].index));
            }
        }
    }

    if (scan.reviewed_indices.empty()) add(std::nullopt, "no reviewed sections");
    std::set<int> reviewed_seen;
    for (int idx : scan.reviewed_indices) {
        if (!seen.contains(idx)) add(idx, "reviewed index " + std::to_string(idx) + " is not a section of the scan");
        if (!reviewed_seen.insert(idx).second) add(idx, "reviewed index " + std::to_string(idx) + " listed twice");
    }
    // Reviewed indices must follow section order.
    {
        std::vector<std::size_t> pos;
        for (int idx : scan.reviewed_indices) {
            auto it = std::find_if(scan.sections.begin(), scan.sections.end(),
                                   [idx](const SectionGeometry& s) { return s.index == idx; });
            if (it != scan.sections.end()) pos.push_back(static_cast<std::size_t>(it - scan.sections.begin()));
        }
        if (!std::is_sorted(pos.begin(), pos.end())) add(std::nullopt, "reviewed indices are not in section order");
    }

    if (scan.subset_range) {
        const auto& r = *scan.subset_range;
        if (!(r.superior < r.inferior)) add(std::nullopt, "subset range requires superior < inferior");
        if (!seen.contains(r.superior)) add(r.superior, "subset superior index is not a section");
        if (!seen.contains(r.inferior)) add(r.inferior, "subset inferior index is not a section");
    }
    return out;
}

} // namespace

const SectionGeometry& ScanRecord::section(int index) const {
    for (const auto& s : sections)
        if (s.index == index) return s;
    throw ValidationError("scan " + scan_id + ": no section with index " + std::to_string(index));
}

bool ScanRecord::has_section(int index) const {
    return std::any_of(sections.begin(), sections.end(), [index](const SectionGeometry& s) { return s.index == index; });
}

void check_scan_record(const ScanRecord& scan) {
    auto problems = geometry_problems(scan);
    if (!problems.empty()) throw ValidationError("scan " + scan.scan_id + ": " + problems.front().message);
}

std::vector<SectionDistance> inter_section_distances(const ScanRecord& scan, std::optional<double> fallback_mm) {
    const auto& reviewed = scan.reviewed_indices;
    if (reviewed.empty()) throw ValidationError("scan " + scan.scan_id + ": no reviewed sections");

    std::vector<SectionDistance> out;
    out.reserve(reviewed.size());
    if (reviewed.size() == 1) {
        if (!fallback_mm || !(*fallback_mm > 0.0))
            throw UndefinedError("scan " + scan.scan_id + ": cannot derive inter-section distance from one section");
        out.push_back({reviewed.front(), *fallback_mm});
        return out;
    }

    for (std::size_t i = 0; i + 1 < reviewed.size(); ++i) {
        const double gap = std::abs(scan.section(reviewed[i + 1]).table_position_mm -
                                    scan.section(reviewed[i]).table_position_mm);
        if (!(gap > 0.0))
            throw ValidationError("scan " + scan.scan_id + ": zero inter-section distance at section " +
                                  std::to_string(reviewed[i]));
        out.push_back({reviewed[i], gap});
    }
    out.push_back({reviewed.back(), out.back().distance_mm});
    return out;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::scan_geometry: return "scan_geometry";
    case ViolationKind::scan_mismatch: return "scan_mismatch";
    case ViolationKind::section_mismatch: return "section_mismatch";
    case ViolationKind::dimension_mismatch: return "dimension_mismatch";
    case ViolationKind::probability_out_of_range: return "probability_out_of_range";
    case ViolationKind::mask_value: return "mask_value";
    }
    return "unknown";
}

namespace {

template <typename T, typename Bad>
void check_layers(const ScanRecord& scan, const std::string& what, const std::string& layer_scan_id,
                  const std::vector<int>& indices, const std::vector<Grid<T>>& grids, ViolationKind pixel_kind,
                  Bad is_bad, ValidationReport& report) {
    auto add = [&](ViolationKind k, std::optional<int> s, std::string m) {
        report.violations.push_back({k, scan.scan_id, s, what + ": " + std::move(m)});
    };

    if (layer_scan_id != scan.scan_id) add(ViolationKind::scan_mismatch, std::nullopt, "belongs to scan '" + layer_scan_id + "'");

    if (indices.size() != grids.size()) {
        add(ViolationKind::section_mismatch, std::nullopt, "section index list and grid count differ");
        return;
    }
    if (indices != scan.reviewed_indices)
        add(ViolationKind::section_mismatch, std::nullopt, "sections do not match the reviewed indices");

    for (std::size_t k = 0; k < grids.size(); ++k) {
        const int idx = indices[k];
        const auto& g = grids[k];
        if (g.values.size() != static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols)) {
            add(ViolationKind::dimension_mismatch, idx, "pixel buffer size does not match rows x cols");
            continue;
        }
        if (scan.has_section(idx)) {
            const auto& geo = scan.section(idx);
            if (geo.rows != g.rows || geo.cols != g.cols) {
                std::ostringstream m;
                m << "section " << idx << " is " << g.rows << "x" << g.cols << " but geometry is " << geo.rows
                  << "x" << geo.cols;
                add(ViolationKind::dimension_mismatch, idx, m.str());
            }
        }
        int reported = 0;
        std::size_t overflow = 0;
        for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) {
                const T v = g.at(r, c);
                if (!is_bad(v)) continue;
                if (reported < kMaxPixelViolationsPerSection) {
                    std::ostringstream m;
                    m << "section " << idx << " pixel (" << r << ", " << c << ") has invalid value " << +v;
                    add(pixel_kind, idx, m.str());
                    ++reported;
                } else {
                    ++overflow;
                }
            }
        }
        if (overflow > 0)
            add(pixel_kind, idx, "section " + std::to_string(idx) + ": " + std::to_string(overflow) +
                                     " further invalid pixels");
    }
}

} // namespace

ValidationReport validate_scan(const ScanRecord& scan, const ProbabilityRaster& prob, const ReferenceMask& ref) {
    ValidationReport report;
    for (auto& p : geometry_problems(scan))
        report.violations.push_back({ViolationKind::scan_geometry, scan.scan_id, p.section, std::move(p.message)});

    check_layers(scan, "probability raster", prob.scan_id, prob.section_indices, prob.grids,
                 ViolationKind::probability_out_of_range, [](float v) { return !(v >= 0.0f && v <= 1.0f); }, report);
    check_layers(scan, "reference mask", ref.scan_id, ref.section_indices, ref.grids, ViolationKind::mask_value,
                 [](std::uint8_t v) { return v > 1; }, report);
    return report;
}

} // namespace segsweep
