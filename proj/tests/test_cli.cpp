#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "../tools/commands.hpp"
#include "helpers.hpp"
#include "segsweep/report_io.hpp"

using segsweep::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = segsweep::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> small_cohort(const fs::path& dir, const std::string& sections = "3") {
    return {"phantom", "--patients", "3",  "--rows", "96",  "--cols",           "96",
            "--sections", sections, "--ref-radius-min", "10", "--ref-radius-max", "14", "--seed", "5",
            "--out", dir.string()};
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = segsweep::read_text_file(e.path());
    return files;
}

} // namespace

TEST_CASE("usage errors exit 2") {
    TempDir tmp("cli");
    CHECK(run({}).code == 2);
    CHECK(run({"phantom", "--patients", "3"}).code == 2);
    CHECK(run({"sweep", "--manifest", "x.json"}).code == 2);
    CHECK(run({"phantom", "--patients", "abc", "--out", tmp.path().string()}).code == 2);
    CHECK(run({"phantom", "--fissure-gap", "0.5", "--out", tmp.path().string()}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("phantom writes a loadable cohort, byte-identical for the same seed") {
    TempDir a("cli-a"), b("cli-b");
    const auto ra = run(small_cohort(a.path()));
    REQUIRE(ra.code == 0);
    CHECK(ra.out.find("manifest.json") != std::string::npos);
    REQUIRE(run(small_cohort(b.path())).code == 0);
    CHECK(directory_bytes(a.path()) == directory_bytes(b.path()));

    const auto v = run({"validate", "--manifest", (a.path() / "manifest.json").string()});
    CHECK(v.code == 0);
    CHECK(v.out.find("3 patients, 0 with violations") != std::string::npos);
}

TEST_CASE("validate reports a broken raster") {
    TempDir tmp("cli-bad");
    REQUIRE(run(small_cohort(tmp.path())).code == 0);
    const auto manifest = (tmp.path() / "manifest.json").string();
    // flip one probability to 2.0 in the first section of the first scan
    fs::path victim;
    for (const auto& e : fs::directory_iterator(tmp.path() / "rasters"))
        if (e.path().string().ends_with(".prob.sgsw") && (victim.empty() || e.path() < victim)) victim = e.path();
    auto bytes = segsweep::read_text_file(victim);
    const float two = 2.0f;
    std::memcpy(bytes.data() + bytes.size() - sizeof(float), &two, sizeof(float));
    segsweep::write_text_file(victim, bytes);
    const auto v = run({"validate", "--manifest", manifest});
    CHECK(v.code == 1);
    CHECK(v.err.find("probability_out_of_range") != std::string::npos);
    CHECK(run({"validate", "--manifest", (tmp.path() / "missing.json").string()}).code == 1);
}

TEST_CASE("sweep writes one report row per grid value") {
    TempDir tmp("cli-sweep");
    REQUIRE(run(small_cohort(tmp.path() / "data")).code == 0);
    const auto manifest = (tmp.path() / "data" / "manifest.json").string();
    const auto out = tmp.path() / "out";
    const auto r = run({"sweep", "--manifest", manifest, "--grid", "0.01,0.1,0.2,0.3,0.4,0.5", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto report = segsweep::read_text_file(out / "sweep_report.csv");
    CHECK(count_lines(report) == 7);
    for (const char* f : {"per_scan_metrics.csv", "optimal_thresholds.csv", "dsc_boxplot.svg", "optimal_histogram.svg"})
        CHECK(fs::exists(out / f));

    CHECK(run({"sweep", "--manifest", manifest, "--group", "per-patient", "--region", "subset", "--out",
               (tmp.path() / "out2").string()})
              .code == 0);
    CHECK(run({"sweep", "--manifest", manifest, "--grid", "0.5,0.1", "--out", out.string()}).code == 2);
    CHECK(run({"sweep", "--manifest", manifest, "--group", "per-team", "--out", out.string()}).code == 2);
}

TEST_CASE("subset region without ranges is a configuration error") {
    TempDir tmp("cli-subset");
    REQUIRE(run(small_cohort(tmp.path() / "data", "2")).code == 0);
    const auto r = run({"sweep", "--manifest", (tmp.path() / "data" / "manifest.json").string(), "--region", "subset",
                        "--out", (tmp.path() / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("configuration error") != std::string::npos);
}

TEST_CASE("stats from a manifest") {
    TempDir tmp("cli-stats");
    REQUIRE(run(small_cohort(tmp.path() / "data")).code == 0);
    const auto out = tmp.path() / "out";
    const auto r = run({"stats", "--manifest", (tmp.path() / "data" / "manifest.json").string(), "--grid",
                        "0.1,0.3,0.5", "--band", "5", "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("within +-5%") != std::string::npos);
    for (const char* f : {"pvalue_matrix_volume.csv", "pvalue_matrix_dsc.csv", "ks_normality.csv", "bland_altman.csv",
                          "bland_altman_points.csv", "bland_altman.svg"})
        CHECK(fs::exists(out / f));
    const auto ba = segsweep::read_text_file(out / "bland_altman.csv");
    CHECK(ba.find("band_halfwidth,5\n") != std::string::npos);
    CHECK(ba.find("within_band_count,") != std::string::npos);

    // the matrix reads the same across the diagonal
    std::istringstream in(segsweep::read_text_file(out / "pvalue_matrix_dsc.csv"));
    std::vector<std::vector<std::string>> cells;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) row.push_back(c);
        if (line.back() == ',') row.emplace_back();
        cells.push_back(row);
    }
    REQUIRE(cells.size() == 4);
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 1; j < 4; ++j) CHECK(cells[i][j] == cells[j][i]);

    CHECK(run({"stats", "--out", out.string()}).code == 2);
    CHECK(run({"stats", "--manifest", "a", "--metrics", "b", "--out", out.string()}).code == 2);
    CHECK(run({"stats", "--manifest", (tmp.path() / "data" / "manifest.json").string(), "--grid", "0.1,0.3",
               "--ba-threshold", "0.5", "--out", out.string()})
              .code == 1);
}

TEST_CASE("stats marks identical threshold columns as undefined") {
    TempDir tmp("cli-ident");
    std::string csv = "scan_id,patient_id,threshold,metric,value\n";
    for (int s = 0; s < 6; ++s) {
        const std::string id = "s" + std::to_string(s);
        for (const char* t : {"0.1", "0.2", "0.5"}) {
            const double dsc = std::string(t) == "0.5" ? 0.9 - 0.01 * s : 0.5 + 0.03 * s;
            csv += id + ",p" + std::to_string(s) + "," + t + ",volume_pred," + std::to_string(100 + 10 * s) + "\n";
            csv += id + ",p" + std::to_string(s) + "," + t + ",volume_ref,100\n";
            csv += id + ",p" + std::to_string(s) + "," + t + ",mean_dsc," + segsweep::format_number(dsc) + "\n";
            csv += id + ",p" + std::to_string(s) + "," + t + ",abs_pct_diff," + std::to_string(10 * s) + "\n";
        }
    }
    segsweep::write_text_file(tmp.path() / "m.csv", csv);
    const auto r = run({"stats", "--metrics", (tmp.path() / "m.csv").string(), "--out", (tmp.path() / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const auto dsc = segsweep::read_text_file(tmp.path() / "out" / "pvalue_matrix_dsc.csv");
    CHECK(dsc.find("0.1,,n/a,") != std::string::npos);
}
