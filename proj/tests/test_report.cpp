#include <doctest.h>

#include <sstream>

#include "segsweep/error.hpp"
#include "segsweep/report_io.hpp"
#include "segsweep/svg.hpp"

using namespace segsweep;

namespace {

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("format_number") {
    CHECK(format_number(0.001) == "0.001");
    CHECK(format_number(2821.786) == "2821.79");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::optional<double>{}) == "n/a");
    CHECK(format_number(std::optional<double>{12.0}) == "12");
}

TEST_CASE("report CSV has one row per threshold") {
    SweepReport r{ThresholdGrid({0.1, 0.5}), {}, Grouping::per_scan, Region::whole};
    r.rows.push_back({0.1, 12.5, 1.0, 0.8, 0.1, 0.81, 0.05, 3});
    r.rows.push_back({0.5, {}, {}, {}, {}, {}, {}, 0});
    const auto ls = lines(report_csv(r));
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "threshold,mean_abs_pct_diff,sd_abs_pct_diff,mean_dsc,sd_dsc,median_dsc,iqr_dsc,n");
    CHECK(ls[1] == "0.1,12.5,1,0.8,0.1,0.81,0.05,3");
    CHECK(ls[2] == "0.5,n/a,n/a,n/a,n/a,n/a,n/a,0");
}

TEST_CASE("per-scan CSV round trip") {
    ScanMetrics a{"s1", "p1", {}};
    ThresholdMetrics t;
    t.threshold = 0.1;
    t.volume_pred = 1234.5;
    t.volume_ref = 1000;
    t.signed_pct_diff = -23.45;
    t.abs_pct_diff = 23.45;
    t.mean_dsc = 0.75;
    t.median_dsc = 0.8;
    t.excluded_sections = 2;
    a.per_threshold.push_back(t);
    t.threshold = 0.5;
    t.mean_dsc.reset();
    t.median_dsc.reset();
    a.per_threshold.push_back(t);
    ScanMetrics b = a;
    b.scan_id = "s2";
    b.patient_id = "p2";
    const std::vector<ScanMetrics> ms{a, b};
    const auto text = per_scan_csv(ms);
    CHECK(lines(text).size() == 1 + 2 * 2 * 7);
    CHECK(parse_per_scan_csv(text) == ms);
    CHECK_THROWS_AS(parse_per_scan_csv("bad header\n"), ParseError);
    CHECK_THROWS_AS(parse_per_scan_csv("scan_id,patient_id,threshold,metric,value\ns1,p1,0.1,mean_dsc,abc\n"),
                    ParseError);
}

TEST_CASE("p-value CSV") {
    PValueMatrix m;
    m.thresholds = {0.1, 0.2};
    m.cells = {{std::nullopt, std::nullopt}, {std::nullopt, std::nullopt}};
    const auto ls = lines(pvalue_csv(m));
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "threshold,0.1,0.2");
    CHECK(ls[1] == "0.1,,n/a");
    CHECK(ls[2] == "0.2,n/a,");
}

TEST_CASE("Bland-Altman CSV reports the band count") {
    const auto r = bland_altman_differences(std::vector<double>{3, -4, 12}, 5.0);
    const auto text = bland_altman_csv(r, 0.5);
    CHECK(text.find("within_band_count,2\n") != std::string::npos);
    CHECK(text.find("threshold,0.5\n") != std::string::npos);
}

TEST_CASE("box statistics") {
    const auto b = box_stats(std::vector<double>{1, 2, 3, 4, 100});
    CHECK(b.median == 3.0);
    CHECK(b.q1 == 2.0);
    CHECK(b.q3 == 4.0);
    CHECK(b.whisker_low == 1.0);
    CHECK(b.whisker_high == 4.0);
    CHECK(b.outliers == std::vector<double>{100});
}

TEST_CASE("SVG output is deterministic") {
    const std::vector<double> th{0.1, 0.5};
    const std::vector<std::vector<double>> samples{{0.5, 0.6, 0.7}, {0.8, 0.85, 0.9}};
    const auto a = dsc_boxplot_svg(th, samples, "DSC");
    CHECK(a == dsc_boxplot_svg(th, samples, "DSC"));
    CHECK(a.rfind("<svg", 0) == 0);
    const auto r = bland_altman_differences(std::vector<double>{3, -4, 12}, 5.0);
    const auto ba = bland_altman_svg(r, "BA");
    CHECK(ba.find("fill-opacity") != std::string::npos);
}
