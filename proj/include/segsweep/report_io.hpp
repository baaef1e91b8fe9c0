#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segsweep/stats.hpp"
#include "segsweep/sweep.hpp"

namespace segsweep {

// Six significant digits, '.' decimal separator, independent of the locale.
std::string format_number(double v);
// "n/a" for an empty value.
std::string format_number(const std::optional<double>& v);

// threshold,mean_abs_pct_diff,sd_abs_pct_diff,mean_dsc,sd_dsc,median_dsc,iqr_dsc,n
std::string report_csv(const SweepReport& report);

// Long format: scan_id,patient_id,threshold,metric,value
std::string per_scan_csv(const std::vector<ScanMetrics>& metrics);
// Inverse of per_scan_csv (up to the printed precision). Throws ParseError.
std::vector<ScanMetrics> parse_per_scan_csv(const std::string& text);

// scan_id,patient_id,t_volume,t_dsc
std::string optimal_thresholds_csv(const std::vector<ScanMetrics>& metrics);

// Threshold labels on the header row and first column; "n/a" off-diagonal
// where undefined, empty on the diagonal.
std::string pvalue_csv(const PValueMatrix& matrix);

// metric,value summary rows.
std::string bland_altman_csv(const BlandAltmanResult& result, double threshold);
std::string bland_altman_points_csv(const BlandAltmanResult& result, const std::vector<std::string>& scan_ids,
                                    std::span<const double> v_ref, std::span<const double> v_pred);

struct KsRow {
    std::string metric;
    double threshold = 0.0;
    std::optional<KsResult> result;
};
std::string ks_csv(const std::vector<KsRow>& rows);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace segsweep
