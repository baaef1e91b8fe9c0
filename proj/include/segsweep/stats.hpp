#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segsweep/metrics.hpp"
#include "segsweep/sweep.hpp"

namespace segsweep {

// Standard normal CDF via erfc; absolute error well below 1e-7.
double normal_cdf(double x);

// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject_at_05 = false;
    std::size_t n = 0;
};

// One-sample KS test against the standard normal. With `standardize` the
// sample is first centred on its mean and scaled by its sample SD.
// Requires n >= 4; a zero-variance sample is rejected as degenerate.
KsResult ks_normality(std::span<const double> sample, bool standardize = true);

// sup |F_n - Phi| over an already-transformed sample.
double ks_statistic_normal(std::span<const double> values);

struct PairedSample {
    std::vector<std::string> labels;
    std::vector<double> a;
    std::vector<double> b;

    PairedSample(std::vector<std::string> labels, std::vector<double> a, std::vector<double> b);
    std::size_t size() const { return a.size(); }
};

struct WilcoxonResult {
    double w = 0.0; // min(W+, W-)
    double w_plus = 0.0;
    double w_minus = 0.0;
    double p_value = 1.0; // two-sided
    std::size_t n_effective = 0;
    bool exact = false;
};

// Largest zero-free sample size for which the exact null distribution is used.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

enum class WilcoxonMethod { automatic, exact, normal };

// Signed-rank test on a - b. Zero differences are dropped; tied |d| get
// mid-ranks. Exact when n_effective <= 25 without ties, otherwise normal
// approximation with continuity and tie corrections. Throws UndefinedError
// when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& pairs, WilcoxonMethod method = WilcoxonMethod::automatic);
WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences,
                                    WilcoxonMethod method = WilcoxonMethod::automatic);

// Number of sign assignments of ranks 1..n with W+ equal to each value 0..n(n+1)/2.
std::vector<double> signed_rank_null_counts(std::size_t n);

struct PValueMatrix {
    std::vector<double> thresholds;
    // cells[i][j]; empty on the diagonal and wherever the test is undefined.
    std::vector<std::vector<std::optional<double>>> cells;
    std::vector<std::string> warnings;
};

// Wilcoxon p-value for every pair of grid thresholds, paired by scan or by
// patient (per-patient values are scan averages). Only units with the metric
// defined at both thresholds enter a cell.
PValueMatrix pvalue_matrix(const std::vector<ScanMetrics>& metrics, SweepMetric metric,
                           Grouping pairing = Grouping::per_scan);

struct BlandAltmanResult {
    std::size_t n = 0;
    std::size_t excluded = 0;
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    double loa_low = 0.0;
    double loa_high = 0.0;
    std::size_t within_band_count = 0;
    double band_halfwidth = 0.0;
    // Per retained pair.
    std::vector<double> differences;
    std::vector<double> means;
    std::vector<std::size_t> kept;
};

inline constexpr double kLoaMultiplier = 1.96;

BlandAltmanResult bland_altman_differences(std::span<const double> differences, double band_halfwidth);

// Percent differences per pair under `convention`; pairs with an undefined
// difference are excluded and counted.
BlandAltmanResult bland_altman(std::span<const double> v_ref, std::span<const double> v_pred,
                               PercentConvention convention, double band_halfwidth);

} // namespace segsweep
