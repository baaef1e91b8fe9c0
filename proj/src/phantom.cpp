#include "segsweep/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "segsweep/error.hpp"
#include "segsweep/parallel.hpp"
#include "segsweep/raster_io.hpp"

namespace segsweep {

namespace {

constexpr double pi = std::numbers::pi;

bool disk_fits(PixelPoint c, double r, int rows, int cols) {
    return c.row - r >= 0.0 && c.row + r <= rows - 1.0 && c.col - r >= 0.0 && c.col + r <= cols - 1.0;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string padded(int value, int width) {
    std::string s = std::to_string(value);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

} // namespace

void check_phantom_spec(const PhantomSpec& s) {
    auto fail = [](const std::string& m) { throw ValidationError("phantom spec: " + m); };
    if (s.rows <= 0 || s.cols <= 0) fail("rows and cols must be positive");
    if (s.n_sections < 1) fail("need at least one section");
    if (s.review_stride < 1) fail("review stride must be at least 1");
    if (!(s.pixel_spacing_mm > 0.0)) fail("pixel spacing must be positive");
    if (!(s.section_distance_mm > 0.0)) fail("section distance must be positive");
    if (!(s.cone_radius > 0.0) || !(s.ref_radius > 0.0)) fail("radii must be positive");
    if (!disk_fits(s.cone_center, s.cone_radius, s.rows, s.cols)) fail("cone does not fit in the grid");
    if (!disk_fits(s.ref_center, s.ref_radius, s.rows, s.cols)) fail("reference disk does not fit in the grid");
    if (s.effusion) {
        if (!(s.effusion->level > 0.0 && s.effusion->level < 1.0)) fail("effusion level must lie in (0, 1)");
        if (!(s.effusion->radius > 0.0)) fail("effusion radius must be positive");
        if (!disk_fits(s.effusion->center, s.effusion->radius, s.rows, s.cols)) fail("effusion does not fit in the grid");
    }
    if (s.gap) {
        if (s.gap->row_begin < 0 || s.gap->row_end > s.rows || s.gap->row_begin >= s.gap->row_end)
            fail("gap band must be a non-empty row range inside the grid");
    }
}

PhantomScan generate(const PhantomSpec& spec, const std::string& scan_id, const std::string& patient_id) {
    check_phantom_spec(spec);

    PhantomScan out;
    auto& scan = out.scan;
    scan.scan_id = scan_id;
    scan.patient_id = patient_id;
    const int total = (spec.n_sections - 1) * spec.review_stride + 1;
    const double step = spec.section_distance_mm / spec.review_stride;
    for (int k = 0; k < total; ++k) {
        scan.sections.push_back({k, k * step, spec.pixel_spacing_mm, spec.rows, spec.cols});
        if (k % spec.review_stride == 0) scan.reviewed_indices.push_back(k);
    }

    ProbabilityGrid prob(spec.rows, spec.cols);
    MaskGrid ref(spec.rows, spec.cols);
    for (int r = 0; r < spec.rows; ++r) {
        const bool in_gap = spec.gap && r >= spec.gap->row_begin && r < spec.gap->row_end;
        for (int c = 0; c < spec.cols; ++c) {
            const double d = std::hypot(r - spec.cone_center.row, c - spec.cone_center.col);
            double p = std::clamp(1.0 - d / spec.cone_radius, 0.0, 1.0);
            if (spec.effusion) {
                const auto& e = *spec.effusion;
                if (std::hypot(r - e.center.row, c - e.center.col) <= e.radius) p = std::max(p, e.level);
            }
            if (in_gap) p = 0.0;
            prob.at(r, c) = static_cast<float>(p);

            const bool inside = std::hypot(r - spec.ref_center.row, c - spec.ref_center.col) <= spec.ref_radius;
            ref.at(r, c) = (inside && !(in_gap && spec.gap->zero_reference)) ? 1 : 0;
        }
    }

    out.prob.scan_id = out.ref.scan_id = scan_id;
    out.prob.section_indices = out.ref.section_indices = scan.reviewed_indices;
    out.prob.grids.assign(scan.reviewed_indices.size(), prob);
    out.ref.grids.assign(scan.reviewed_indices.size(), ref);
    return out;
}

double thresholded_radius(const PhantomSpec& spec, double threshold) {
    return spec.cone_radius * (1.0 - threshold);
}

double analytic_volume(const PhantomSpec& spec, double threshold) {
    const double r_mm = thresholded_radius(spec, threshold) * spec.pixel_spacing_mm;
    return spec.n_sections * pi * r_mm * r_mm * spec.section_distance_mm;
}

double disk_intersection_area(double r1, double r2, double d) {
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) {
        const double r = std::min(r1, r2);
        return pi * r * r;
    }
    // Sum of the two circular segments cut by the common chord.
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
    const double kite = 0.5 * std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)));
    return r1 * r1 * a1 + r2 * r2 * a2 - kite;
}

double analytic_dsc(const PhantomSpec& spec, double threshold) {
    const double rt = thresholded_radius(spec, threshold);
    const double rr = spec.ref_radius;
    const double d = std::hypot(spec.cone_center.row - spec.ref_center.row, spec.cone_center.col - spec.ref_center.col);
    if (d == 0.0) {
        const double m = std::min(rt, rr);
        return 2.0 * m * m / (rt * rt + rr * rr);
    }
    return 2.0 * disk_intersection_area(rt, rr, d) / (pi * rt * rt + pi * rr * rr);
}

double volume_matching_threshold(double underseg_factor) { return 1.0 - 1.0 / (2.0 * std::sqrt(underseg_factor)); }

std::vector<CohortScan> plan_cohort(const CohortOptions& o) {
    if (o.n_patients < 1 || o.scans_min < 1 || o.scans_max < o.scans_min)
        throw ConfigError("cohort: need n_patients >= 1 and 1 <= scans_min <= scans_max");
    if (o.n_sections < 1) throw ConfigError("cohort: need at least one section per scan");
    if (!(o.bias.underseg_factor > 0.0)) throw ConfigError("cohort: undersegmentation factor must be positive");
    if (!(o.bias.effusion_probability >= 0.0 && o.bias.effusion_probability <= 1.0))
        throw ConfigError("cohort: effusion probability must lie in [0, 1]");
    if (!(o.ref_radius_min > 0.0 && o.ref_radius_max >= o.ref_radius_min))
        throw ConfigError("cohort: invalid reference radius range");
    if (o.total_scans &&
        (*o.total_scans < o.n_patients * o.scans_min || *o.total_scans > o.n_patients * o.scans_max))
        throw ConfigError("cohort: total scan count is not reachable with the per-patient bounds");

    std::mt19937_64 rng(o.seed);

    std::vector<int> counts(static_cast<std::size_t>(o.n_patients));
    if (o.total_scans) {
        std::fill(counts.begin(), counts.end(), o.scans_min);
        int remaining = *o.total_scans - o.n_patients * o.scans_min;
        while (remaining > 0) {
            auto& c = counts[static_cast<std::size_t>(uniform_int(rng, 0, o.n_patients - 1))];
            if (c < o.scans_max) {
                ++c;
                --remaining;
            }
        }
    } else {
        for (auto& c : counts) c = uniform_int(rng, o.scans_min, o.scans_max);
    }

    const int pwidth = std::max(2, static_cast<int>(std::to_string(o.n_patients).size()));
    constexpr double reviewed_gap_mm = 5.0;
    constexpr double thicknesses[] = {1.25, 2.5, 5.0};

    std::vector<CohortScan> out;
    for (int p = 0; p < o.n_patients; ++p) {
        const std::string pid = "P" + padded(p + 1, pwidth);
        for (int s = 0; s < counts[static_cast<std::size_t>(p)]; ++s) {
            CohortScan cs;
            cs.patient_id = pid;
            cs.scan_id = pid + "-S" + std::to_string(s + 1);

            PhantomSpec& spec = cs.spec;
            spec.rows = o.rows;
            spec.cols = o.cols;
            spec.n_sections = o.n_sections;
            spec.seed = o.seed;
            const double thickness = thicknesses[uniform_int(rng, 0, 2)];
            spec.review_stride = static_cast<int>(std::lround(reviewed_gap_mm / thickness));
            spec.section_distance_mm = reviewed_gap_mm;
            spec.pixel_spacing_mm = uniform(rng, 0.6, 0.9);

            spec.ref_radius = uniform(rng, o.ref_radius_min, o.ref_radius_max);
            spec.cone_radius = 2.0 * std::sqrt(o.bias.underseg_factor) * spec.ref_radius;
            const double side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            const double shift = o.bias.center_offset * spec.ref_radius;

            const bool effusion = uniform01(rng) < o.bias.effusion_probability;
            const double eff_radius = 0.4 * spec.ref_radius;
            const double eff_side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            const double eff_distance = std::max(spec.cone_radius, spec.ref_radius + shift) + eff_radius + 4.0;

            const double half_rows = std::max(spec.cone_radius, shift + spec.ref_radius);
            const double half_cols = effusion ? eff_distance + eff_radius : std::max(spec.cone_radius, spec.ref_radius);
            const double slack_r = (o.rows - 1) / 2.0 - half_rows;
            const double slack_c = (o.cols - 1) / 2.0 - half_cols;
            if (slack_r < 0.0 || slack_c < 0.0)
                throw ConfigError("cohort: scan " + cs.scan_id + " does not fit in a " + std::to_string(o.rows) + "x" +
                                  std::to_string(o.cols) + " grid");
            const double jr = uniform(rng, -1.0, 1.0) * std::min(slack_r, 10.0);
            const double jc = uniform(rng, -1.0, 1.0) * std::min(slack_c, 10.0);
            spec.cone_center = {(o.rows - 1) / 2.0 + jr, (o.cols - 1) / 2.0 + jc};
            spec.ref_center = {spec.cone_center.row + side * shift, spec.cone_center.col};

            if (effusion) {
                spec.effusion = EffusionBlob{{spec.cone_center.row, spec.cone_center.col + eff_side * eff_distance},
                                             eff_radius, o.bias.effusion_level};
            }
            if (o.bias.fissure_gap) {
                const double a = spec.cone_center.row + side * o.bias.fissure_gap->first * spec.ref_radius;
                const double b = spec.cone_center.row + side * o.bias.fissure_gap->second * spec.ref_radius;
                const int begin = std::clamp(static_cast<int>(std::floor(std::min(a, b))), 0, o.rows);
                const int end = std::clamp(static_cast<int>(std::ceil(std::max(a, b))), 0, o.rows);
                if (end > begin) spec.gap = GapBand{begin, end, false};
            }

            const int n = o.n_sections;
            if (n >= 3) {
                const int lo = n / 5, hi = n - 1 - n / 5;
                cs.subset_range = SubsetRange{lo * spec.review_stride, hi * spec.review_stride};
            }
            out.push_back(std::move(cs));
        }
    }
    return out;
}

PhantomScan realize(const CohortScan& planned) {
    auto scan = generate(planned.spec, planned.scan_id, planned.patient_id);
    scan.scan.subset_range = planned.subset_range;
    return scan;
}

DatasetManifest generate_cohort(const CohortOptions& options, const std::filesystem::path& out_dir,
                                std::size_t workers) {
    const auto plan = plan_cohort(options);
    const auto raster_dir = out_dir / "rasters";
    std::error_code ec;
    std::filesystem::create_directories(raster_dir, ec);
    if (ec) throw IoError("cannot create " + raster_dir.string() + ": " + ec.message());

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    manifest.scans.resize(plan.size());
    parallel_for(plan.size(), workers, [&](std::size_t i) {
        const auto ph = realize(plan[i]);
        ManifestEntry e;
        e.scan = ph.scan;
        e.prob_path = "rasters/" + plan[i].scan_id + ".prob.sgsw";
        e.ref_path = "rasters/" + plan[i].scan_id + ".ref.sgsw";
        write_probability_raster(manifest.resolve(e.prob_path), ph.prob);
        write_reference_mask(manifest.resolve(e.ref_path), ph.ref);
        manifest.scans[i] = std::move(e);
    });
    write_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

} // namespace segsweep
