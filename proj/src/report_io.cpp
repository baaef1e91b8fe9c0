#include "segsweep/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "segsweep/error.hpp"

namespace segsweep {

std::string format_number(double v) {
    if (std::isnan(v)) return "n/a";
    if (v == 0.0) v = 0.0; // drop the sign of -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "n/a"; }

std::string report_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "threshold,mean_abs_pct_diff,sd_abs_pct_diff,mean_dsc,sd_dsc,median_dsc,iqr_dsc,n\n";
    for (const auto& r : report.rows) {
        out << format_number(r.threshold) << ',' << format_number(r.mean_abs_pct_diff) << ','
            << format_number(r.sd_abs_pct_diff) << ',' << format_number(r.mean_dsc) << ',' << format_number(r.sd_dsc)
            << ',' << format_number(r.median_dsc) << ',' << format_number(r.iqr_dsc) << ',' << r.n << '\n';
    }
    return out.str();
}

namespace {

constexpr const char* kMetricNames[] = {"volume_pred", "volume_ref",  "signed_pct_diff",  "abs_pct_diff",
                                        "mean_dsc",    "median_dsc", "excluded_sections"};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::optional<double> parse_value(const std::string& s, std::size_t line_no) {
    if (s == "n/a") return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("per-scan metrics line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

} // namespace

std::string per_scan_csv(const std::vector<ScanMetrics>& metrics) {
    std::ostringstream out;
    out << "scan_id,patient_id,threshold,metric,value\n";
    for (const auto& m : metrics) {
        for (const auto& t : m.per_threshold) {
            const std::optional<double> values[] = {t.volume_pred,    t.volume_ref, t.signed_pct_diff,
                                                    t.abs_pct_diff,   t.mean_dsc,   t.median_dsc,
                                                    static_cast<double>(t.excluded_sections)};
            for (std::size_t k = 0; k < std::size(kMetricNames); ++k) {
                out << m.scan_id << ',' << m.patient_id << ',' << format_number(t.threshold) << ',' << kMetricNames[k]
                    << ',' << format_number(values[k]) << '\n';
            }
        }
    }
    return out.str();
}

std::vector<ScanMetrics> parse_per_scan_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != "scan_id,patient_id,threshold,metric,value")
        throw ParseError("per-scan metrics line 1: unexpected header");

    std::vector<ScanMetrics> out;
    std::map<std::string, std::size_t> scan_pos;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ParseError("per-scan metrics line " + std::to_string(line_no) + ": expected 5 fields");
        const auto t = parse_value(f[2], line_no);
        if (!t) throw ParseError("per-scan metrics line " + std::to_string(line_no) + ": missing threshold");

        auto [it, fresh] = scan_pos.try_emplace(f[0], out.size());
        if (fresh) out.push_back(ScanMetrics{f[0], f[1], {}});
        auto& sm = out[it->second];
        if (sm.patient_id != f[1])
            throw ParseError("per-scan metrics line " + std::to_string(line_no) + ": scan " + f[0] +
                             " listed under two patients");
        if (sm.per_threshold.empty() || sm.per_threshold.back().threshold != *t) {
            ThresholdMetrics tm;
            tm.threshold = *t;
            sm.per_threshold.push_back(tm);
        }
        auto& tm = sm.per_threshold.back();
        const auto v = parse_value(f[4], line_no);
        const std::string& name = f[3];
        if (name == "volume_pred")
            tm.volume_pred = v.value_or(0.0);
        else if (name == "volume_ref")
            tm.volume_ref = v.value_or(0.0);
        else if (name == "signed_pct_diff")
            tm.signed_pct_diff = v;
        else if (name == "abs_pct_diff")
            tm.abs_pct_diff = v;
        else if (name == "mean_dsc")
            tm.mean_dsc = v;
        else if (name == "median_dsc")
            tm.median_dsc = v;
        else if (name == "excluded_sections")
            tm.excluded_sections = static_cast<std::size_t>(v.value_or(0.0));
        else
            throw ParseError("per-scan metrics line " + std::to_string(line_no) + ": unknown metric '" + name + "'");
    }
    return out;
}

std::string optimal_thresholds_csv(const std::vector<ScanMetrics>& metrics) {
    std::ostringstream out;
    out << "scan_id,patient_id,t_volume,t_dsc\n";
    for (const auto& m : metrics) {
        const auto o = optimal_thresholds(m);
        out << m.scan_id << ',' << m.patient_id << ',' << format_number(o.t_volume) << ',' << format_number(o.t_dsc)
            << '\n';
    }
    return out.str();
}

std::string pvalue_csv(const PValueMatrix& matrix) {
    std::ostringstream out;
    out << "threshold";
    for (double t : matrix.thresholds) out << ',' << format_number(t);
    out << '\n';
    for (std::size_t i = 0; i < matrix.thresholds.size(); ++i) {
        out << format_number(matrix.thresholds[i]);
        for (std::size_t j = 0; j < matrix.thresholds.size(); ++j) {
            out << ',';
            if (i != j) out << format_number(matrix.cells[i][j]);
        }
        out << '\n';
    }
    return out.str();
}

std::string bland_altman_csv(const BlandAltmanResult& r, double threshold) {
    std::ostringstream out;
    out << "metric,value\n"
        << "threshold," << format_number(threshold) << '\n'
        << "n," << r.n << '\n'
        << "excluded," << r.excluded << '\n'
        << "mean_diff," << format_number(r.mean_diff) << '\n'
        << "sd_diff," << format_number(r.sd_diff) << '\n'
        << "loa_low," << format_number(r.loa_low) << '\n'
        << "loa_high," << format_number(r.loa_high) << '\n'
        << "band_halfwidth," << format_number(r.band_halfwidth) << '\n'
        << "within_band_count," << r.within_band_count << '\n';
    return out.str();
}

std::string bland_altman_points_csv(const BlandAltmanResult& r, const std::vector<std::string>& scan_ids,
                                    std::span<const double> v_ref, std::span<const double> v_pred) {
    std::ostringstream out;
    out << "scan_id,volume_ref,volume_pred,mean_volume,pct_diff,within_band\n";
    for (std::size_t k = 0; k < r.kept.size(); ++k) {
        const std::size_t i = r.kept[k];
        out << scan_ids.at(i) << ',' << format_number(v_ref[i]) << ',' << format_number(v_pred[i]) << ','
            << format_number(r.means[k]) << ',' << format_number(r.differences[k]) << ','
            << (std::abs(r.differences[k]) <= r.band_halfwidth ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string ks_csv(const std::vector<KsRow>& rows) {
    std::ostringstream out;
    out << "metric,threshold,n,statistic,p_value,reject_at_0.05\n";
    for (const auto& row : rows) {
        out << row.metric << ',' << format_number(row.threshold) << ',';
        if (row.result)
            out << row.result->n << ',' << format_number(row.result->statistic) << ','
                << format_number(row.result->p_value) << ',' << (row.result->reject_at_05 ? "true" : "false") << '\n';
        else
            out << "n/a,n/a,n/a,n/a\n";
    }
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace segsweep
