#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "segsweep/metrics.hpp"
#include "segsweep/model.hpp"

namespace segsweep {

// Strictly increasing binarization thresholds, each in (0, 1].
class ThresholdGrid {
public:
    explicit ThresholdGrid(std::vector<double> thresholds);

    // 0.001, 0.01, 0.05, 0.1, ..., 0.9
    static ThresholdGrid default_grid();
    // Comma-separated list, e.g. "0.01,0.1,0.5".
    static ThresholdGrid parse(const std::string& text);

    const std::vector<double>& values() const { return thresholds_; }
    std::size_t size() const { return thresholds_.size(); }
    double operator[](std::size_t i) const { return thresholds_[i]; }

    bool operator==(const ThresholdGrid&) const = default;

private:
    std::vector<double> thresholds_;
};

enum class Region { whole, subset };
enum class Grouping { per_scan, per_patient };

std::string to_string(Region r);
std::string to_string(Grouping g);
Region parse_region(const std::string& s);
Grouping parse_grouping(const std::string& s);

struct ThresholdMetrics {
    double threshold = 0.0;
    double volume_pred = 0.0;
    double volume_ref = 0.0;
    // Empty when the quantity is undefined for this scan (zero denominator,
    // no comparable sections).
    std::optional<double> signed_pct_diff;
    std::optional<double> abs_pct_diff;
    std::optional<double> mean_dsc;
    std::optional<double> median_dsc;
    std::size_t excluded_sections = 0;

    bool operator==(const ThresholdMetrics&) const = default;
};

struct ScanMetrics {
    std::string scan_id;
    std::string patient_id;
    std::vector<ThresholdMetrics> per_threshold;

    std::vector<double> thresholds() const;
    bool operator==(const ScanMetrics&) const = default;
};

// Reviewed indices i with superior <= i <= inferior, in reviewed order.
// ConfigError without a subset range, UndefinedError when nothing is left.
std::vector<int> subset_sections(const ScanRecord& scan);

ScanMetrics evaluate_scan(const ScanRecord& scan, const ProbabilityRaster& prob, const ReferenceMask& ref,
                          const ThresholdGrid& grid, Region region = Region::whole,
                          PercentConvention convention = PercentConvention::ref_denominator);

struct SummaryRow {
    double threshold = 0.0;
    std::optional<double> mean_abs_pct_diff;
    std::optional<double> sd_abs_pct_diff;
    std::optional<double> mean_dsc;
    std::optional<double> sd_dsc;
    std::optional<double> median_dsc;
    std::optional<double> iqr_dsc;
    // Units (scans or patients) contributing to the volume statistics.
    std::size_t n = 0;

    bool operator==(const SummaryRow&) const = default;
};

struct SweepReport {
    ThresholdGrid grid;
    std::vector<SummaryRow> rows;
    Grouping grouping = Grouping::per_scan;
    Region region = Region::whole;
};

// One value per aggregation unit at grid position `k`, ordered by unit id.
// Per-patient units average their scans' defined values first.
struct UnitValues {
    std::vector<std::string> unit_ids;
    std::vector<std::optional<double>> values;
};

enum class SweepMetric { abs_pct_diff, mean_dsc, signed_pct_diff, volume_pred, volume_ref };

std::string to_string(SweepMetric m);

UnitValues unit_values(const std::vector<ScanMetrics>& metrics, Grouping grouping, std::size_t k, SweepMetric metric);

// Throws ConfigError when the scans were evaluated on different grids.
ThresholdGrid common_grid(const std::vector<ScanMetrics>& metrics);

SweepReport aggregate(const std::vector<ScanMetrics>& metrics, Grouping grouping, Region region = Region::whole);

struct OptimalThresholds {
    std::optional<double> t_volume;
    std::optional<double> t_dsc;
};

// argmin abs_pct_diff and argmax mean_dsc over the grid; ties go to the
// largest threshold.
OptimalThresholds optimal_thresholds(const ScanMetrics& metrics);

struct OptimalHistogram {
    std::vector<double> thresholds;
    std::vector<std::size_t> volume_counts;
    std::vector<std::size_t> dsc_counts;
};

OptimalHistogram optimal_histogram(const std::vector<ScanMetrics>& metrics);

struct ScanInputs {
    ScanRecord scan;
    ProbabilityRaster prob;
    ReferenceMask ref;
};

// Evaluates `count` scans on up to `workers` threads; `load(i)` supplies the
// inputs for scan i. Results are in index order regardless of scheduling.
std::vector<ScanMetrics> sweep_scans(std::size_t count, const std::function<ScanInputs(std::size_t)>& load,
                                     const ThresholdGrid& grid, Region region, PercentConvention convention,
                                     std::size_t workers);

} // namespace segsweep
