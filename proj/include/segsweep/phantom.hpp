#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segsweep/manifest.hpp"
#include "segsweep/model.hpp"

namespace segsweep {

// Pixel coordinates; pixel (r, c) has its centre at (r, c).
struct PixelPoint {
    double row = 0.0;
    double col = 0.0;
};

// Probability plateau mimicking pleural effusion picked up as tumor.
struct EffusionBlob {
    PixelPoint center;
    double radius = 0.0;
    double level = 0.3;
};

// Rows [row_begin, row_end) where the network misses tumor (fissure). With
// zero_reference the reference excludes the band as well.
struct GapBand {
    int row_begin = 0;
    int row_end = 0;
    bool zero_reference = false;
};

struct PhantomSpec {
    int rows = 512;
    int cols = 512;
    int n_sections = 1; // reviewed sections
    double pixel_spacing_mm = 1.0;
    double section_distance_mm = 5.0; // between reviewed sections
    // The scan holds review_stride - 1 unreviewed sections between reviewed ones.
    int review_stride = 1;
    PixelPoint cone_center{255.5, 255.5};
    double cone_radius = 30.0;
    double ref_radius = 20.0;
    PixelPoint ref_center{255.5, 255.5};
    std::optional<EffusionBlob> effusion;
    std::optional<GapBand> gap;
    // Seed of the cohort draw that produced this spec; generation itself is
    // a pure function of the geometry.
    std::uint64_t seed = 0;
};

struct PhantomScan {
    ScanRecord scan;
    ProbabilityRaster prob;
    ReferenceMask ref;
};

// Throws ValidationError on a broken spec invariant.
void check_phantom_spec(const PhantomSpec& spec);

// p(x) = clamp(1 - |x - cone_center| / cone_radius, 0, 1), raised to the
// effusion level inside the blob, zeroed in the gap band. Reference is the
// disk of ref_radius around ref_center. Every section is identical.
PhantomScan generate(const PhantomSpec& spec, const std::string& scan_id = "phantom",
                     const std::string& patient_id = "phantom");

// Continuous volume of the thresholded cone over all reviewed sections.
// Ignores effusion and gap modes.
double analytic_volume(const PhantomSpec& spec, double threshold);

// Radius of the thresholded cone disk, cone_radius * (1 - threshold).
double thresholded_radius(const PhantomSpec& spec, double threshold);

// Area of intersection of two disks with radii r1, r2 and centre distance d.
double disk_intersection_area(double r1, double r2, double d);

// DSC between the thresholded cone disk and the reference disk.
double analytic_dsc(const PhantomSpec& spec, double threshold);

// Rasterised quantities stay within these of the analytic values once the
// thresholded radius is at least kMinVerifiedRadius pixels.
inline constexpr double kMinVerifiedRadius = 15.0;
inline constexpr double kVolumeRelTolerance = 0.02;
inline constexpr double kDscAbsTolerance = 0.02;

struct CohortBias {
    // Area of the t = 0.5 disk relative to the reference disk; the cone
    // radius is 2 sqrt(f) times the reference radius.
    double underseg_factor = 1.0;
    double effusion_probability = 0.0;
    double effusion_level = 0.3;
    // Reference centre shift along the rows, as a fraction of its radius.
    double center_offset = 0.0;
    // Fissure gap band, rows [begin, end) x reference radius from the cone
    // centre towards the reference shift.
    std::optional<std::pair<double, double>> fissure_gap;
};

struct CohortOptions {
    int n_patients = 21;
    int scans_min = 3;
    int scans_max = 6;
    // When set, per-patient scan counts are drawn to hit this total exactly.
    std::optional<int> total_scans;
    int rows = 512;
    int cols = 512;
    int n_sections = 50;
    double ref_radius_min = 25.0;
    double ref_radius_max = 60.0;
    CohortBias bias;
    std::uint64_t seed = 1;
};

struct CohortScan {
    std::string patient_id;
    std::string scan_id;
    PhantomSpec spec;
    // Middle three fifths of the reviewed sections, when there are at least three.
    std::optional<SubsetRange> subset_range;
};

// The per-scan draw behind generate_cohort, without any I/O.
std::vector<CohortScan> plan_cohort(const CohortOptions& options);

// generate() plus the cohort's subset range.
PhantomScan realize(const CohortScan& planned);

// Volume-matching threshold of an undistorted cone: 1 - ref_radius / cone_radius.
double volume_matching_threshold(double underseg_factor);

// Writes <out_dir>/manifest.json and <out_dir>/rasters/<scan>.{prob,ref}.sgsw.
// Returns the manifest as written.
DatasetManifest generate_cohort(const CohortOptions& options, const std::filesystem::path& out_dir,
                                std::size_t workers = 1);

} // namespace segsweep
