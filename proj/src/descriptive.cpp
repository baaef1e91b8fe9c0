#include "segsweep/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "segsweep/error.hpp"

namespace segsweep {

namespace {
void require_values(std::span<const double> xs, const char* what) {
    if (xs.empty()) throw UndefinedError(std::string(what) + " of an empty sample");
}
} // namespace

double mean(std::span<const double> xs) {
    require_values(xs, "mean");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    require_values(xs, "standard deviation");
    if (xs.size() == 1) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile(std::span<const double> xs, double q) {
    require_values(xs, "quantile");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must lie in [0, 1]");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::span<const double> xs) { return quantile(xs, 0.5); }

double iqr(std::span<const double> xs) { return quantile(xs, 0.75) - quantile(xs, 0.25); }

} // namespace segsweep
