#include "segsweep/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "segsweep/descriptive.hpp"
#include "segsweep/error.hpp"
#include "segsweep/parallel.hpp"

namespace segsweep {

ThresholdGrid::ThresholdGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw ArgumentError("threshold grid is empty");
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        const double t = thresholds_[i];
        if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("grid threshold outside (0, 1]: " + std::to_string(t));
        if (i > 0 && !(t > thresholds_[i - 1])) throw ArgumentError("grid thresholds must be strictly increasing");
    }
}

ThresholdGrid ThresholdGrid::default_grid() {
    return ThresholdGrid({0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
}

ThresholdGrid ThresholdGrid::parse(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ArgumentError("grid entry '" + item + "' is not a number");
        }
        if (used != item.size()) throw ArgumentError("grid entry '" + item + "' is not a number");
        values.push_back(v);
    }
    return ThresholdGrid(std::move(values));
}

std::string to_string(Region r) { return r == Region::whole ? "whole" : "subset"; }
std::string to_string(Grouping g) { return g == Grouping::per_scan ? "per-scan" : "per-patient"; }

Region parse_region(const std::string& s) {
    if (s == "whole") return Region::whole;
    if (s == "subset") return Region::subset;
    throw ArgumentError("unknown region '" + s + "' (expected whole|subset)");
}

Grouping parse_grouping(const std::string& s) {
    if (s == "per-scan") return Grouping::per_scan;
    if (s == "per-patient") return Grouping::per_patient;
    throw ArgumentError("unknown grouping '" + s + "' (expected per-scan|per-patient)");
}

std::string to_string(SweepMetric m) {
    switch (m) {
    case SweepMetric::abs_pct_diff: return "abs_pct_diff";
    case SweepMetric::mean_dsc: return "mean_dsc";
    case SweepMetric::signed_pct_diff: return "signed_pct_diff";
    case SweepMetric::volume_pred: return "volume_pred";
    case SweepMetric::volume_ref: return "volume_ref";
    }
    return "unknown";
}

std::vector<double> ScanMetrics::thresholds() const {
    std::vector<double> out;
    out.reserve(per_threshold.size());
    for (const auto& m : per_threshold) out.push_back(m.threshold);
    return out;
}

std::vector<int> subset_sections(const ScanRecord& scan) {
    if (!scan.subset_range) throw ConfigError("scan " + scan.scan_id + ": subset region requested without a subset range");
    const auto [lo, hi] = *scan.subset_range;
    std::vector<int> out;
    for (int idx : scan.reviewed_indices)
        if (idx >= lo && idx <= hi) out.push_back(idx);
    if (out.empty()) throw UndefinedError("scan " + scan.scan_id + ": empty subset");
    return out;
}

namespace {

// Restricts scan and layers to the given reviewed sections.
template <typename Layer>
Layer restrict_layer(const Layer& layer, const std::vector<int>& keep) {
    Layer out;
    out.scan_id = layer.scan_id;
    for (std::size_t k = 0; k < layer.section_indices.size(); ++k) {
        if (std::find(keep.begin(), keep.end(), layer.section_indices[k]) != keep.end()) {
            out.section_indices.push_back(layer.section_indices[k]);
            out.grids.push_back(layer.grids[k]);
        }
    }
    return out;
}

ScanMetrics evaluate_sections(const ScanRecord& scan, const ProbabilityRaster& prob, const ReferenceMask& ref,
                              const ThresholdGrid& grid, PercentConvention convention) {
    ScanMetrics out;
    out.scan_id = scan.scan_id;
    out.patient_id = scan.patient_id;

    const BinaryMask ref_mask = BinaryMask::from_reference(ref);
    const double v_ref = tumor_volume(ref_mask, scan).volume_mm3;

    for (double t : grid.values()) {
        const BinaryMask pred = binarize(prob, t);
        ThresholdMetrics m;
        m.threshold = t;
        m.volume_ref = v_ref;
        m.volume_pred = tumor_volume(pred, scan).volume_mm3;
        try {
            m.signed_pct_diff = percent_volume_difference(v_ref, m.volume_pred, convention, true);
            m.abs_pct_diff = std::abs(*m.signed_pct_diff);
        } catch (const UndefinedError&) {
        }
        try {
            const auto d = scan_dsc(pred, ref_mask);
            m.mean_dsc = d.mean;
            m.median_dsc = d.median;
            m.excluded_sections = d.excluded_sections;
        } catch (const UndefinedError&) {
            m.excluded_sections = pred.grids.size();
        }
        out.per_threshold.push_back(m);
    }
    return out;
}

} // namespace

ScanMetrics evaluate_scan(const ScanRecord& scan, const ProbabilityRaster& prob, const ReferenceMask& ref,
                          const ThresholdGrid& grid, Region region, PercentConvention convention) {
    if (region == Region::whole) return evaluate_sections(scan, prob, ref, grid, convention);

    const auto keep = subset_sections(scan);
    ScanRecord sub = scan;
    sub.reviewed_indices = keep;
    return evaluate_sections(sub, restrict_layer(prob, keep), restrict_layer(ref, keep), grid, convention);
}

ThresholdGrid common_grid(const std::vector<ScanMetrics>& metrics) {
    if (metrics.empty()) throw ArgumentError("no scan metrics to aggregate");
    const auto first = metrics.front().thresholds();
    for (const auto& m : metrics)
        if (m.thresholds() != first) throw ConfigError("scan " + m.scan_id + " was evaluated on a different grid");
    return ThresholdGrid(first);
}

namespace {

std::optional<double> pick(const ThresholdMetrics& m, SweepMetric metric) {
    switch (metric) {
    case SweepMetric::abs_pct_diff: return m.abs_pct_diff;
    case SweepMetric::mean_dsc: return m.mean_dsc;
    case SweepMetric::signed_pct_diff: return m.signed_pct_diff;
    case SweepMetric::volume_pred: return m.volume_pred;
    case SweepMetric::volume_ref: return m.volume_ref;
    }
    return std::nullopt;
}

std::vector<double> defined(const std::vector<std::optional<double>>& xs) {
    std::vector<double> out;
    for (const auto& x : xs)
        if (x) out.push_back(*x);
    return out;
}

} // namespace

UnitValues unit_values(const std::vector<ScanMetrics>& metrics, Grouping grouping, std::size_t k, SweepMetric metric) {
    // std::map keeps units ordered by id, so results do not depend on input order.
    std::map<std::string, std::vector<double>> per_unit;
    std::map<std::string, bool> seen;
    std::vector<const ScanMetrics*> order;
    for (const auto& m : metrics) order.push_back(&m);
    // Patients average their scans in scan-id order for reproducible sums.
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->scan_id < b->scan_id; });
    for (const auto* mp : order) {
        const auto& m = *mp;
        const std::string& id = grouping == Grouping::per_scan ? m.scan_id : m.patient_id;
        if (grouping == Grouping::per_scan && seen.contains(id))
            throw ValidationError("duplicate scan_id '" + id + "' in metrics");
        seen[id] = true;
        auto& bucket = per_unit[id];
        if (auto v = pick(m.per_threshold.at(k), metric)) bucket.push_back(*v);
    }

    UnitValues out;
    for (auto& [id, vals] : per_unit) {
        out.unit_ids.push_back(id);
        out.values.push_back(vals.empty() ? std::nullopt : std::optional<double>(mean(vals)));
    }
    return out;
}

SweepReport aggregate(const std::vector<ScanMetrics>& metrics, Grouping grouping, Region region) {
    SweepReport report{common_grid(metrics), {}, grouping, region};

    for (std::size_t k = 0; k < report.grid.size(); ++k) {
        SummaryRow row;
        row.threshold = report.grid[k];
        const auto vol = defined(unit_values(metrics, grouping, k, SweepMetric::abs_pct_diff).values);
        const auto dsc = defined(unit_values(metrics, grouping, k, SweepMetric::mean_dsc).values);
        row.n = vol.size();
        if (!vol.empty()) {
            row.mean_abs_pct_diff = mean(vol);
            row.sd_abs_pct_diff = sample_sd(vol);
        }
        if (!dsc.empty()) {
            row.mean_dsc = mean(dsc);
            row.sd_dsc = sample_sd(dsc);
            row.median_dsc = median(dsc);
            row.iqr_dsc = iqr(dsc);
        }
        report.rows.push_back(row);
    }
    return report;
}

OptimalThresholds optimal_thresholds(const ScanMetrics& metrics) {
    OptimalThresholds out;
    std::optional<double> best_vol, best_dsc;
    // Ascending grid with >= / <= comparisons: later (larger) thresholds win ties.
    for (const auto& m : metrics.per_threshold) {
        if (m.abs_pct_diff && (!best_vol || *m.abs_pct_diff <= *best_vol)) {
            best_vol = m.abs_pct_diff;
            out.t_volume = m.threshold;
        }
        if (m.mean_dsc && (!best_dsc || *m.mean_dsc >= *best_dsc)) {
            best_dsc = m.mean_dsc;
            out.t_dsc = m.threshold;
        }
    }
    return out;
}

OptimalHistogram optimal_histogram(const std::vector<ScanMetrics>& metrics) {
    const auto grid = common_grid(metrics);
    OptimalHistogram h{grid.values(), std::vector<std::size_t>(grid.size(), 0), std::vector<std::size_t>(grid.size(), 0)};
    auto slot = [&](double t) {
        return static_cast<std::size_t>(std::find(h.thresholds.begin(), h.thresholds.end(), t) - h.thresholds.begin());
    };
    for (const auto& m : metrics) {
        const auto opt = optimal_thresholds(m);
        if (opt.t_volume) ++h.volume_counts[slot(*opt.t_volume)];
        if (opt.t_dsc) ++h.dsc_counts[slot(*opt.t_dsc)];
    }
    return h;
}

std::vector<ScanMetrics> sweep_scans(std::size_t count, const std::function<ScanInputs(std::size_t)>& load,
                                     const ThresholdGrid& grid, Region region, PercentConvention convention,
                                     std::size_t workers) {
    std::vector<ScanMetrics> out(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const ScanInputs in = load(i);
        out[i] = evaluate_scan(in.scan, in.prob, in.ref, grid, region, convention);
    });
    return out;
}

} // namespace segsweep
