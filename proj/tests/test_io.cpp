#include <doctest.h>

#include <fstream>
#include <random>

#include "helpers.hpp"
#include "segsweep/error.hpp"
#include "segsweep/manifest.hpp"
#include "segsweep/phantom.hpp"
#include "segsweep/raster_io.hpp"

using namespace segsweep;
using segsweep::testing::make_scan;
using segsweep::testing::TempDir;

namespace {

const char* kMinimalManifest = R"({
  "scans": [
    {
      "scan_id": "s1",
      "patient_id": "p1",
      "sections": [
        {"index": 0, "table_position_mm": 0.0, "pixel_spacing_mm": 0.75, "rows": 3, "cols": 2},
        {"index": 1, "table_position_mm": 5.0, "pixel_spacing_mm": 0.75, "rows": 3, "cols": 2},
        {"index": 2, "table_position_mm": 10.0, "pixel_spacing_mm": 0.75, "rows": 3, "cols": 2}
      ],
      "reviewed_indices": [0, 1, 2],
      "prob_path": "s1.prob.sgsw",
      "ref_path": "s1.ref.sgsw"
    }
  ]
})";

void write_rasters_for(const ScanRecord& scan, const std::filesystem::path& dir) {
    write_probability_raster(dir / (scan.scan_id + ".prob.sgsw"), segsweep::testing::uniform_raster(scan, 0.5f));
    write_reference_mask(dir / (scan.scan_id + ".ref.sgsw"), segsweep::testing::uniform_mask(scan, 1));
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

} // namespace

TEST_CASE("raster files round-trip bit-exactly") {
    TempDir tmp("raster");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 20; ++trial) {
        ProbabilityRaster p{"scan" + std::to_string(trial), {}, {}};
        ReferenceMask m{p.scan_id, {}, {}};
        const int n = 1 + trial % 4;
        for (int k = 0; k < n; ++k) {
            ProbabilityGrid g(dim(rng), dim(rng));
            for (auto& v : g.values) v = u(rng);
            p.section_indices.push_back(3 * k);
            m.section_indices.push_back(3 * k);
            m.grids.push_back(segsweep::testing::random_mask(rng, g.rows, g.cols, 0.4));
            p.grids.push_back(std::move(g));
        }
        write_probability_raster(tmp.path() / "p.sgsw", p);
        write_reference_mask(tmp.path() / "m.sgsw", m);
        const auto p2 = read_probability_raster(tmp.path() / "p.sgsw");
        const auto m2 = read_reference_mask(tmp.path() / "m.sgsw");
        CHECK(p2.scan_id == p.scan_id);
        CHECK(p2.section_indices == p.section_indices);
        CHECK(p2.grids == p.grids);
        CHECK(m2.grids == m.grids);
        CHECK(m2.section_indices == m.section_indices);
    }
}

TEST_CASE("raster header layout") {
    TempDir tmp("layout");
    ProbabilityRaster p{"abc", {4}, {ProbabilityGrid(1, 2, 0.25f)}};
    write_probability_raster(tmp.path() / "p.sgsw", p);
    std::ifstream in(tmp.path() / "p.sgsw", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    REQUIRE(bytes.size() > 9);
    CHECK(bytes.substr(0, 4) == "SGSW");
    CHECK(bytes[4] == 1);
    const std::uint32_t len = static_cast<unsigned char>(bytes[5]) | (static_cast<unsigned char>(bytes[6]) << 8) |
                              (static_cast<unsigned char>(bytes[7]) << 16) |
                              (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8])) << 24);
    const std::string header = bytes.substr(9, len);
    CHECK(header.find("\"dtype\":\"f32\"") != std::string::npos);
    CHECK(header.find("\"scan_id\":\"abc\"") != std::string::npos);
    // Two little-endian 0.25f values follow the header.
    CHECK(bytes.size() == 9 + len + 8);
    CHECK(static_cast<unsigned char>(bytes[9 + len + 3]) == 0x3e);
}

TEST_CASE("raster read errors") {
    TempDir tmp("rerr");
    write_text(tmp.path() / "bad.sgsw", "NOPE\x01");
    CHECK_THROWS_AS(read_raster_header(tmp.path() / "bad.sgsw"), ParseError);
    CHECK_THROWS_AS(read_raster_header(tmp.path() / "missing.sgsw"), IoError);

    ProbabilityRaster p{"abc", {0}, {ProbabilityGrid(4, 4, 0.5f)}};
    write_probability_raster(tmp.path() / "p.sgsw", p);
    CHECK_THROWS_AS(read_reference_mask(tmp.path() / "p.sgsw"), ParseError);
    std::filesystem::resize_file(tmp.path() / "p.sgsw", std::filesystem::file_size(tmp.path() / "p.sgsw") - 3);
    CHECK_THROWS_AS(read_probability_raster(tmp.path() / "p.sgsw"), ParseError);
}

TEST_CASE("load_manifest") {
    TempDir tmp("manifest");
    write_text(tmp.path() / "m.json", kMinimalManifest);

    SUBCASE("minimal manifest with one scan") {
        const auto scan = parse_manifest(kMinimalManifest, tmp.path()).scans.at(0).scan;
        write_rasters_for(scan, tmp.path());
        const auto m = load_manifest(tmp.path() / "m.json");
        REQUIRE(m.scans.size() == 1);
        CHECK(m.scans[0].scan.reviewed_indices.size() == 3);
        CHECK(m.scans[0].scan.sections[1].pixel_spacing_mm == 0.75);
        CHECK_FALSE(m.scans[0].scan.subset_range.has_value());
    }

    SUBCASE("missing raster names the path") {
        try {
            load_manifest(tmp.path() / "m.json");
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("s1.prob.sgsw") != std::string::npos);
        }
    }

    SUBCASE("raster geometry mismatch names scan and section") {
        auto scan = parse_manifest(kMinimalManifest, tmp.path()).scans.at(0).scan;
        write_rasters_for(scan, tmp.path());
        scan.sections[2].rows = 5;
        write_reference_mask(tmp.path() / "s1.ref.sgsw", segsweep::testing::uniform_mask(scan, 0));
        try {
            load_manifest(tmp.path() / "m.json");
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("scan s1") != std::string::npos);
            CHECK(msg.find("section 2") != std::string::npos);
        }
    }

    SUBCASE("syntax error reports the line") {
        try {
            parse_manifest("{\n  \"scans\": [\n    {,\n  ]\n}", tmp.path());
            FAIL("expected an error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }

    SUBCASE("wrong field type reports the field") {
        std::string text = kMinimalManifest;
        text.replace(text.find("\"rows\": 3"), 9, "\"rows\": \"3\"");
        try {
            parse_manifest(text, tmp.path());
            FAIL("expected an error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("scans[0].sections[0].rows") != std::string::npos);
        }
    }

    SUBCASE("duplicate scan ids") {
        DatasetManifest m;
        m.scans.push_back({make_scan({0, 5}), "a", "b"});
        m.scans.push_back({make_scan({0, 5}), "c", "d"});
        CHECK_THROWS_AS(parse_manifest(manifest_to_json(m), tmp.path()), ValidationError);
    }
}

TEST_CASE("manifest write/parse round-trip is field-for-field") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 7.3);
    for (int trial = 0; trial < 25; ++trial) {
        DatasetManifest m;
        m.base_dir = "/data";
        const int scans = 1 + trial % 5;
        for (int s = 0; s < scans; ++s) {
            std::vector<double> pos{u(rng) - 50.0};
            for (int k = 0; k < 6; ++k) pos.push_back(pos.back() + u(rng));
            auto scan = make_scan(pos, u(rng), 8 + s, 9, "scan" + std::to_string(s), "pat" + std::to_string(s % 2));
            scan.reviewed_indices = {0, 2, 4, 6};
            if (s % 2 == 0) scan.subset_range = SubsetRange{2, 5};
            m.scans.push_back({scan, "r/" + scan.scan_id + ".p", "/abs/" + scan.scan_id + ".r"});
        }
        const auto back = parse_manifest(manifest_to_json(m), m.base_dir);
        CHECK(back.scans == m.scans);
        CHECK(back.resolve("x") == std::filesystem::path("/data/x"));
        CHECK(back.resolve("/abs/y") == std::filesystem::path("/abs/y"));
    }
}

TEST_CASE("21-patient, 88-scan phantom manifest loads with its grouping") {
    TempDir tmp("cohort88");
    CohortOptions o;
    o.n_patients = 21;
    o.total_scans = 88;
    o.rows = o.cols = 48;
    o.n_sections = 3;
    o.ref_radius_min = 6;
    o.ref_radius_max = 9;
    o.bias.underseg_factor = 0.5625;
    o.seed = 7;
    generate_cohort(o, tmp.path());
    const auto m = load_manifest(tmp.path() / "manifest.json");
    CHECK(m.scans.size() == 88);
    CHECK(m.patient_ids().size() == 21);
}
