#include "segsweep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "segsweep/descriptive.hpp"
#include "segsweep/error.hpp"

namespace segsweep {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (lambda < 1.18) {
        // Jacobi theta form of the CDF; converges fast for small lambda.
        const double w = -pi * pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(odd * odd * w);
            s += term;
            if (term < 1e-17 * s) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic_normal(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

KsResult ks_normality(std::span<const double> sample, bool standardize) {
    if (sample.size() < 4) throw ArgumentError("ks_normality: need at least 4 values, got " + std::to_string(sample.size()));
    const double sd = sample_sd(sample);
    if (!(sd > 0.0)) throw UndefinedError("ks_normality: degenerate sample (zero variance)");

    std::vector<double> z(sample.begin(), sample.end());
    if (standardize) {
        const double m = mean(sample);
        for (auto& x : z) x = (x - m) / sd;
    }
    KsResult r;
    r.n = z.size();
    r.statistic = ks_statistic_normal(z);
    r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(r.n)) * r.statistic);
    r.reject_at_05 = r.p_value < 0.05;
    return r;
}

PairedSample::PairedSample(std::vector<std::string> l, std::vector<double> x, std::vector<double> y)
    : labels(std::move(l)), a(std::move(x)), b(std::move(y)) {
    if (a.empty()) throw ArgumentError("paired sample is empty");
    if (a.size() != b.size() || labels.size() != a.size())
        throw ArgumentError("paired sample: labels and value lists differ in length");
}

std::vector<double> signed_rank_null_counts(std::size_t n) {
    const std::size_t max_w = n * (n + 1) / 2;
    std::vector<double> counts(max_w + 1, 0.0);
    counts[0] = 1.0;
    // Subset-sum over ranks: each rank is either positive (adds to W+) or not.
    std::size_t reach = 0;
    for (std::size_t r = 1; r <= n; ++r) {
        reach += r;
        for (std::size_t w = reach; w >= r; --w) counts[w] += counts[w - r];
    }
    return counts;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> differences, WilcoxonMethod method) {
    std::vector<double> d;
    for (double x : differences)
        if (x != 0.0) d.push_back(x);
    if (d.empty()) throw UndefinedError("wilcoxon: no nonzero pairs");

    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });

    std::vector<double> rank(n);
    double tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        const double t = static_cast<double>(j - i + 1);
        if (j > i) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }

    WilcoxonResult r;
    r.n_effective = n;
    for (std::size_t i = 0; i < n; ++i) (d[i] > 0 ? r.w_plus : r.w_minus) += rank[i];
    r.w = std::min(r.w_plus, r.w_minus);

    bool exact = false;
    switch (method) {
    case WilcoxonMethod::automatic: exact = !ties && n <= kWilcoxonExactMaxN; break;
    case WilcoxonMethod::exact:
        if (ties) throw ArgumentError("wilcoxon: exact method needs untied absolute differences");
        exact = true;
        break;
    case WilcoxonMethod::normal: exact = false; break;
    }
    r.exact = exact;

    const double nn = static_cast<double>(n);
    if (exact) {
        const auto counts = signed_rank_null_counts(n);
        const auto w = static_cast<std::size_t>(std::llround(r.w));
        double tail = 0.0;
        for (std::size_t k = 0; k <= w; ++k) tail += counts[k];
        r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    } else {
        const double mu = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double z = std::max(0.0, (std::abs(r.w_plus - mu) - 0.5) / std::sqrt(var));
        r.p_value = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
    }
    return r;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& pairs, WilcoxonMethod method) {
    std::vector<double> d(pairs.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = pairs.a[i] - pairs.b[i];
    return wilcoxon_signed_rank(d, method);
}

PValueMatrix pvalue_matrix(const std::vector<ScanMetrics>& metrics, SweepMetric metric, Grouping pairing) {
    const auto grid = common_grid(metrics);
    if (grid.size() < 2) throw ArgumentError("pvalue_matrix: need at least two thresholds");

    PValueMatrix out;
    out.thresholds = grid.values();
    const std::size_t g = grid.size();
    out.cells.assign(g, std::vector<std::optional<double>>(g));

    std::vector<UnitValues> columns;
    for (std::size_t k = 0; k < g; ++k) columns.push_back(unit_values(metrics, pairing, k, metric));

    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = i + 1; j < g; ++j) {
            std::vector<std::string> labels;
            std::vector<double> a, b;
            for (std::size_t u = 0; u < columns[i].unit_ids.size(); ++u) {
                if (columns[i].values[u] && columns[j].values[u]) {
                    labels.push_back(columns[i].unit_ids[u]);
                    a.push_back(*columns[i].values[u]);
                    b.push_back(*columns[j].values[u]);
                }
            }
            try {
                const auto w = wilcoxon_signed_rank(PairedSample(std::move(labels), std::move(a), std::move(b)));
                out.cells[i][j] = out.cells[j][i] = w.p_value;
            } catch (const std::exception& e) {
                out.warnings.push_back(to_string(metric) + " " + std::to_string(out.thresholds[i]) + " vs " +
                                       std::to_string(out.thresholds[j]) + ": " + e.what());
            }
        }
    }
    return out;
}

BlandAltmanResult bland_altman_differences(std::span<const double> differences, double band_halfwidth) {
    if (differences.empty()) throw UndefinedError("bland_altman: no valid pairs");
    if (!(band_halfwidth >= 0.0)) throw ArgumentError("bland_altman: band halfwidth must be non-negative");
    BlandAltmanResult r;
    r.n = differences.size();
    r.band_halfwidth = band_halfwidth;
    r.differences.assign(differences.begin(), differences.end());
    r.mean_diff = mean(differences);
    r.sd_diff = sample_sd(differences);
    r.loa_low = r.mean_diff - kLoaMultiplier * r.sd_diff;
    r.loa_high = r.mean_diff + kLoaMultiplier * r.sd_diff;
    for (double d : differences)
        if (std::abs(d) <= band_halfwidth) ++r.within_band_count;
    return r;
}

BlandAltmanResult bland_altman(std::span<const double> v_ref, std::span<const double> v_pred,
                               PercentConvention convention, double band_halfwidth) {
    if (v_ref.size() != v_pred.size()) throw ArgumentError("bland_altman: volume lists differ in length");
    std::vector<double> diffs, means;
    std::vector<std::size_t> kept;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < v_ref.size(); ++i) {
        try {
            diffs.push_back(percent_volume_difference(v_ref[i], v_pred[i], convention, true));
            means.push_back(0.5 * (v_ref[i] + v_pred[i]));
            kept.push_back(i);
        } catch (const UndefinedError&) {
            ++excluded;
        }
    }
    auto r = bland_altman_differences(diffs, band_halfwidth);
    r.excluded = excluded;
    r.means = std::move(means);
    r.kept = std::move(kept);
    return r;
}

} // namespace segsweep
