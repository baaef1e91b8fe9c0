#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "segsweep/error.hpp"
#include "segsweep/manifest.hpp"
#include "segsweep/parallel.hpp"
#include "segsweep/phantom.hpp"
#include "segsweep/report_io.hpp"
#include "segsweep/stats.hpp"
#include "segsweep/svg.hpp"
#include "segsweep/sweep.hpp"

namespace segsweep::cli {

namespace fs = std::filesystem;

namespace {

struct PhantomArgs {
    CohortOptions cohort;
    std::optional<std::string> fissure_gap;
    std::string out;
};

struct SweepArgs {
    std::string manifest;
    std::string grid;
    std::string group = "per-scan";
    std::string region = "whole";
    std::string convention = "ref";
    std::string out;
};

struct StatsArgs {
    std::string metrics;
    std::string manifest;
    std::string grid;
    std::string region = "whole";
    std::string convention = "ref";
    std::string pair = "per-scan";
    double band = 5.0;
    double ba_threshold = 0.5;
    bool raw_ks = false;
    std::string out;
};

ThresholdGrid grid_from(const std::string& text) {
    return text.empty() ? ThresholdGrid::default_grid() : ThresholdGrid::parse(text);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::pair<double, double> parse_band(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ArgumentError("--fissure-gap expects BEGIN,END");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ArgumentError("--fissure-gap expects two numbers");
    }
}

int cmd_phantom(PhantomArgs& a, std::ostream& out) {
    if (a.fissure_gap) a.cohort.bias.fissure_gap = parse_band(*a.fissure_gap);
    const fs::path dir(a.out);
    generate_cohort(a.cohort, dir, worker_count());
    out << (dir / "manifest.json").string() << '\n';
    return kExitOk;
}

// Loads and validates one scan; a failed validation is reported as a
// ValidationError listing every violation.
ScanInputs load_scan(const DatasetManifest& manifest, std::size_t i) {
    const auto& entry = manifest.scans[i];
    ScanInputs in{entry.scan, load_probability(manifest, entry), load_reference(manifest, entry)};
    const auto report = validate_scan(in.scan, in.prob, in.ref);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "scan " << entry.scan.scan_id << " failed validation:";
        for (const auto& v : report.violations) msg << "\n  [" << to_string(v.kind) << "] " << v.message;
        throw ValidationError(msg.str());
    }
    return in;
}

std::vector<ScanMetrics> run_sweep(const std::string& manifest_path, const ThresholdGrid& grid, Region region,
                                   PercentConvention convention) {
    const auto manifest = load_manifest(manifest_path);
    if (region == Region::subset)
        for (const auto& e : manifest.scans)
            if (!e.scan.subset_range)
                throw ConfigError("scan " + e.scan.scan_id + ": --region subset requires a subset_range");
    return sweep_scans(
        manifest.scans.size(), [&](std::size_t i) { return load_scan(manifest, i); }, grid, region, convention,
        worker_count());
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const auto grid = grid_from(a.grid);
    const auto grouping = parse_grouping(a.group);
    const auto region = parse_region(a.region);
    const auto convention = parse_convention(a.convention);

    const auto metrics = run_sweep(a.manifest, grid, region, convention);
    const auto report = aggregate(metrics, grouping, region);

    const fs::path dir(a.out);
    ensure_dir(dir);
    write_text_file(dir / "sweep_report.csv", report_csv(report));
    write_text_file(dir / "per_scan_metrics.csv", per_scan_csv(metrics));
    write_text_file(dir / "optimal_thresholds.csv", optimal_thresholds_csv(metrics));

    std::vector<std::vector<double>> boxes;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> vals;
        for (const auto& v : unit_values(metrics, grouping, k, SweepMetric::mean_dsc).values)
            if (v) vals.push_back(*v);
        boxes.push_back(std::move(vals));
    }
    write_text_file(dir / "dsc_boxplot.svg",
                    dsc_boxplot_svg(grid.values(), boxes, "DSC by threshold (" + to_string(grouping) + ", " +
                                                              to_string(region) + ")"));
    write_text_file(dir / "optimal_histogram.svg", optimal_histogram_svg(optimal_histogram(metrics)));

    out << "evaluated " << metrics.size() << " scans at " << grid.size() << " thresholds; wrote "
        << (dir / "sweep_report.csv").string() << '\n';
    return kExitOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
    if (a.metrics.empty() == a.manifest.empty()) throw ArgumentError("give exactly one of --metrics or --manifest");
    const auto pairing = parse_grouping(a.pair);
    const auto convention = parse_convention(a.convention);

    std::vector<ScanMetrics> metrics;
    if (!a.metrics.empty())
        metrics = parse_per_scan_csv(read_text_file(a.metrics));
    else
        metrics = run_sweep(a.manifest, grid_from(a.grid), parse_region(a.region), convention);
    const auto grid = common_grid(metrics);

    const fs::path dir(a.out);
    ensure_dir(dir);

    const auto vol = pvalue_matrix(metrics, SweepMetric::abs_pct_diff, pairing);
    const auto dsc = pvalue_matrix(metrics, SweepMetric::mean_dsc, pairing);
    for (const auto& w : vol.warnings) err << "warning: " << w << '\n';
    for (const auto& w : dsc.warnings) err << "warning: " << w << '\n';
    write_text_file(dir / "pvalue_matrix_volume.csv", pvalue_csv(vol));
    write_text_file(dir / "pvalue_matrix_dsc.csv", pvalue_csv(dsc));

    std::vector<KsRow> ks_rows;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (auto metric : {SweepMetric::abs_pct_diff, SweepMetric::mean_dsc}) {
            KsRow row{to_string(metric), grid[k], std::nullopt};
            std::vector<double> sample;
            for (const auto& v : unit_values(metrics, pairing, k, metric).values)
                if (v) sample.push_back(*v);
            try {
                row.result = ks_normality(sample, !a.raw_ks);
            } catch (const std::exception& e) {
                err << "warning: KS " << row.metric << " at " << format_number(grid[k]) << ": " << e.what() << '\n';
            }
            ks_rows.push_back(row);
        }
    }
    write_text_file(dir / "ks_normality.csv", ks_csv(ks_rows));

    const auto& thresholds = grid.values();
    const auto it = std::find(thresholds.begin(), thresholds.end(), a.ba_threshold);
    if (it == thresholds.end())
        throw ConfigError("Bland-Altman threshold " + format_number(a.ba_threshold) + " is not on the grid");
    const auto k = static_cast<std::size_t>(it - thresholds.begin());
    std::vector<std::string> ids;
    std::vector<double> v_ref, v_pred;
    for (const auto& m : metrics) {
        ids.push_back(m.scan_id);
        v_ref.push_back(m.per_threshold[k].volume_ref);
        v_pred.push_back(m.per_threshold[k].volume_pred);
    }
    const auto ba = bland_altman(v_ref, v_pred, convention, a.band);
    if (ba.excluded > 0) err << "warning: " << ba.excluded << " scans excluded from Bland-Altman (zero denominator)\n";
    write_text_file(dir / "bland_altman.csv", bland_altman_csv(ba, a.ba_threshold));
    write_text_file(dir / "bland_altman_points.csv", bland_altman_points_csv(ba, ids, v_ref, v_pred));
    write_text_file(dir / "bland_altman.svg",
                    bland_altman_svg(ba, "Bland-Altman, threshold " + format_number(a.ba_threshold)));

    out << "Bland-Altman at " << format_number(a.ba_threshold) << ": mean " << format_number(ba.mean_diff)
        << "%, limits [" << format_number(ba.loa_low) << ", " << format_number(ba.loa_high) << "], "
        << ba.within_band_count << " of " << ba.n << " within +-" << format_number(a.band) << "%\n";
    return kExitOk;
}

int cmd_validate(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    const auto manifest = load_manifest(manifest_path);
    std::size_t bad = 0;
    for (const auto& entry : manifest.scans) {
        const auto report =
            validate_scan(entry.scan, load_probability(manifest, entry), load_reference(manifest, entry));
        for (const auto& v : report.violations) err << entry.scan.scan_id << ": [" << to_string(v.kind) << "] " << v.message << '\n';
        bad += report.ok() ? 0 : 1;
    }
    out << manifest.scans.size() << " scans, " << manifest.patient_ids().size() << " patients, " << bad
        << " with violations\n";
    return bad == 0 ? kExitOk : kExitFailure;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Threshold-sweep evaluation of probabilistic tumor segmentations", "segsweep"};
    app.require_subcommand(1);

    PhantomArgs ph;
    auto* phantom = app.add_subcommand("phantom", "Write a synthetic phantom cohort (manifest + rasters)");
    phantom->add_option("--patients", ph.cohort.n_patients, "Number of patients")->capture_default_str();
    phantom->add_option("--scans-min", ph.cohort.scans_min, "Minimum scans per patient")->capture_default_str();
    phantom->add_option("--scans-max", ph.cohort.scans_max, "Maximum scans per patient")->capture_default_str();
    phantom->add_option("--total-scans", ph.cohort.total_scans, "Exact cohort size");
    phantom->add_option("--bias-underseg", ph.cohort.bias.underseg_factor,
                        "Area of the t=0.5 disk relative to the reference")
        ->capture_default_str();
    phantom->add_option("--effusion-prob", ph.cohort.bias.effusion_probability, "Probability of an effusion blob")
        ->capture_default_str();
    phantom->add_option("--effusion-level", ph.cohort.bias.effusion_level, "Effusion plateau probability")
        ->capture_default_str();
    phantom->add_option("--center-offset", ph.cohort.bias.center_offset,
                        "Reference centre shift as a fraction of its radius")
        ->capture_default_str();
    phantom->add_option("--fissure-gap", ph.fissure_gap, "BEGIN,END band in reference radii from the cone centre");
    phantom->add_option("--rows", ph.cohort.rows)->capture_default_str();
    phantom->add_option("--cols", ph.cohort.cols)->capture_default_str();
    phantom->add_option("--sections", ph.cohort.n_sections, "Reviewed sections per scan")->capture_default_str();
    phantom->add_option("--ref-radius-min", ph.cohort.ref_radius_min)->capture_default_str();
    phantom->add_option("--ref-radius-max", ph.cohort.ref_radius_max)->capture_default_str();
    phantom->add_option("--seed", ph.cohort.seed)->capture_default_str();
    phantom->add_option("--out", ph.out, "Output directory")->required();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Evaluate every scan at every grid threshold");
    sweep->add_option("--manifest", sw.manifest)->required();
    sweep->add_option("--grid", sw.grid, "Comma-separated thresholds (default 0.001,...,0.9)");
    sweep->add_option("--group", sw.group, "per-scan|per-patient")->capture_default_str();
    sweep->add_option("--region", sw.region, "whole|subset")->capture_default_str();
    sweep->add_option("--convention", sw.convention, "ref|mean")->capture_default_str();
    sweep->add_option("--out", sw.out, "Output directory")->required();

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "Wilcoxon p-value matrices, KS checks and Bland-Altman");
    stats->add_option("--metrics", st.metrics, "per_scan_metrics.csv from a sweep");
    stats->add_option("--manifest", st.manifest, "Run the sweep from a manifest instead");
    stats->add_option("--grid", st.grid, "Grid when running from a manifest");
    stats->add_option("--region", st.region, "whole|subset")->capture_default_str();
    stats->add_option("--convention", st.convention, "ref|mean")->capture_default_str();
    stats->add_option("--pair", st.pair, "per-scan|per-patient")->capture_default_str();
    stats->add_option("--band", st.band, "Bland-Altman band half-width [%]")->capture_default_str();
    stats->add_option("--ba-threshold", st.ba_threshold, "Threshold for the Bland-Altman analysis")
        ->capture_default_str();
    stats->add_flag("--raw-ks", st.raw_ks, "Test raw values against N(0,1) without standardizing");
    stats->add_option("--out", st.out, "Output directory")->required();

    std::string validate_manifest;
    auto* validate = app.add_subcommand("validate", "Check a manifest and its rasters");
    validate->add_option("--manifest", validate_manifest)->required();

    std::vector<std::string> argv_store{"segsweep"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        // Prints help for --help, the usage message otherwise.
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (phantom->parsed()) return cmd_phantom(ph, out);
        if (sweep->parsed()) return cmd_sweep(sw, out);
        if (stats->parsed()) return cmd_stats(st, out, err);
        if (validate->parsed()) return cmd_validate(validate_manifest, out, err);
    } catch (const ArgumentError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace segsweep::cli
