#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "segsweep/error.hpp"
#include "segsweep/metrics.hpp"
#include "segsweep/phantom.hpp"
#include "segsweep/sweep.hpp"

using namespace segsweep;

namespace {

PhantomSpec centred(int size, double cone, double ref) {
    PhantomSpec s;
    s.rows = s.cols = size;
    const double c = (size - 1) / 2.0;
    s.cone_center = s.ref_center = {c, c};
    s.cone_radius = cone;
    s.ref_radius = ref;
    return s;
}

} // namespace

TEST_CASE("cone thresholded at 0.5 is the disk of half its radius") {
    const auto spec = centred(128, 30, 20);
    const auto ph = generate(spec);
    const auto mask = binarize(ph.prob, 0.5);
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            const double d = std::hypot(r - 63.5, c - 63.5);
            if (std::abs(d - 15.0) < 1e-6) continue;
            CHECK(mask.grids[0].at(r, c) == (d <= 15.0 ? 1 : 0));
        }
}

TEST_CASE("cone probability never increases with distance from the centre") {
    const auto spec = centred(96, 40, 20);
    const auto ph = generate(spec);
    const auto& g = ph.prob.grids[0];
    for (int c = 48; c + 1 < 96; ++c) CHECK(g.at(48, c + 1) <= g.at(48, c));
    for (int r = 48; r + 1 < 96; ++r) CHECK(g.at(r + 1, r + 1) <= g.at(r, r));
    for (float v : g.values) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("generation is deterministic and structurally valid") {
    auto spec = centred(64, 20, 15);
    spec.n_sections = 4;
    spec.review_stride = 2;
    const auto a = generate(spec, "x", "y");
    const auto b = generate(spec, "x", "y");
    CHECK(a.prob.grids == b.prob.grids);
    CHECK(a.ref.grids == b.ref.grids);
    CHECK(a.scan.sections.size() == 7);
    CHECK(a.scan.reviewed_indices == std::vector<int>{0, 2, 4, 6});
    CHECK(validate_scan(a.scan, a.prob, a.ref).ok());
    const auto d = inter_section_distances(a.scan);
    for (const auto& x : d) CHECK(x.distance_mm == doctest::Approx(5.0));
}

TEST_CASE("phantom spec checks") {
    auto spec = centred(64, 40, 15);
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec = centred(64, 20, 15);
    spec.gap = GapBand{10, 10, false};
    CHECK_THROWS_AS(generate(spec), ValidationError);
    spec.gap.reset();
    spec.effusion = EffusionBlob{{10, 10}, 4, 1.5};
    CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("analytic formulas") {
    const auto spec = centred(512, 30, 15);
    CHECK(analytic_volume(spec, 0.5) == doctest::Approx(std::numbers::pi * 15 * 15 * 5.0));
    CHECK(analytic_volume(spec, 0.5) / 5.0 == doctest::Approx(706.858).epsilon(1e-5));
    CHECK(analytic_volume(spec, 0.001) / 5.0 == doctest::Approx(std::numbers::pi * 29.97 * 29.97));
    CHECK(analytic_volume(spec, 1.0) == 0.0);
    CHECK(analytic_dsc(centred(512, 40, 20), 0.5) == doctest::Approx(1.0));
    CHECK(analytic_dsc(centred(512, 30, 20), 0.5) == doctest::Approx(0.72));
    auto apart = centred(512, 30, 20);
    apart.ref_center.row += 50;
    CHECK(analytic_dsc(apart, 0.5) == 0.0);
    CHECK(disk_intersection_area(10, 10, 0) == doctest::Approx(std::numbers::pi * 100));
    CHECK(disk_intersection_area(10, 5, 3) == doctest::Approx(std::numbers::pi * 25));
    // two unit disks at distance 1: 2pi/3 - sqrt(3)/2
    CHECK(disk_intersection_area(1, 1, 1) == doctest::Approx(2 * std::numbers::pi / 3 - std::sqrt(3.0) / 2));
}

TEST_CASE("rasterised metrics track the analytic values") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        auto spec = centred(256, 40 + 40 * u(rng), 20 + 30 * u(rng));
        spec.ref_center.row += 20 * (u(rng) - 0.5);
        spec.cone_center.col += 20 * (u(rng) - 0.5);
        spec.pixel_spacing_mm = 0.6 + 0.3 * u(rng);
        spec.n_sections = 2;
        const auto ph = generate(spec);
        for (double t : {0.1, 0.3, 0.5, 0.6}) {
            if (thresholded_radius(spec, t) < kMinVerifiedRadius) continue;
            const auto mask = binarize(ph.prob, t);
            const double v = tumor_volume(mask, ph.scan).volume_mm3;
            CHECK(std::abs(v - analytic_volume(spec, t)) <= kVolumeRelTolerance * analytic_volume(spec, t));
            const auto d = scan_dsc(mask, ph.ref);
            CHECK(std::abs(d.mean - analytic_dsc(spec, t)) <= kDscAbsTolerance);
        }
    }
}

TEST_CASE("effusion and gap modes") {
    auto spec = centred(160, 40, 20);
    spec.effusion = EffusionBlob{{79.5, 130}, 10, 0.3};
    const auto ph = generate(spec);
    CHECK(ph.prob.grids[0].at(79, 130) == doctest::Approx(0.3f));
    auto plain = spec;
    plain.effusion.reset();
    const auto base = generate(plain);
    // above the plateau nothing changes
    CHECK(binarize(ph.prob, 0.5).grids == binarize(base.prob, 0.5).grids);
    CHECK(count_nonzero(binarize(ph.prob, 0.01).grids[0]) > count_nonzero(binarize(base.prob, 0.01).grids[0]));

    auto gapped = centred(160, 40, 20);
    gapped.gap = GapBand{70, 80, false};
    const auto g = generate(gapped);
    for (int c = 0; c < 160; ++c) CHECK(g.prob.grids[0].at(75, c) == 0.0f);
    CHECK(g.ref.grids[0].at(75, 79) == 1);
    gapped.gap->zero_reference = true;
    CHECK(generate(gapped).ref.grids[0].at(75, 79) == 0);
}

TEST_CASE("cohort planning") {
    CohortOptions o;
    o.rows = o.cols = 256;
    o.ref_radius_min = 15;
    o.ref_radius_max = 30;
    o.n_sections = 5;
    o.seed = 9;
    const auto plan = plan_cohort(o);
    CHECK(plan.size() >= 63);
    CHECK(plan.size() <= 126);
    std::set<std::string> patients;
    for (const auto& cs : plan) patients.insert(cs.patient_id);
    CHECK(patients.size() == 21);
    CHECK(plan.front().scan_id == "P01-S1");

    const auto again = plan_cohort(o);
    REQUIRE(again.size() == plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        CHECK(again[i].scan_id == plan[i].scan_id);
        CHECK(again[i].spec.cone_radius == plan[i].spec.cone_radius);
        CHECK(again[i].spec.cone_center.row == plan[i].spec.cone_center.row);
    }

    o.total_scans = 88;
    CHECK(plan_cohort(o).size() == 88);
    o.total_scans = 10;
    CHECK_THROWS_AS(plan_cohort(o), ConfigError);
    o.total_scans.reset();
    o.rows = o.cols = 64;
    CHECK_THROWS_AS(plan_cohort(o), ConfigError);
}

TEST_CASE("cohort volume-matching threshold") {
    CHECK(volume_matching_threshold(0.5625) == doctest::Approx(1.0 / 3.0));
    CHECK(volume_matching_threshold(1.0) == doctest::Approx(0.5));

    CohortOptions o;
    o.n_patients = 4;
    o.rows = o.cols = 256;
    o.ref_radius_min = 25;
    o.ref_radius_max = 40;
    o.n_sections = 3;
    const auto plan = plan_cohort(o);
    for (const auto& cs : plan) {
        const auto ph = realize(cs);
        const auto m = evaluate_scan(ph.scan, ph.prob, ph.ref, ThresholdGrid({0.5}));
        CHECK(*m.per_threshold[0].abs_pct_diff < 2.0);
        CHECK(*m.per_threshold[0].mean_dsc > 0.98);
        REQUIRE(ph.scan.subset_range.has_value());
        CHECK_NOTHROW(check_scan_record(ph.scan));
    }
}
