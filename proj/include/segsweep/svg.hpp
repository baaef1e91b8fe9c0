#pragma once

#include <string>
#include <vector>

#include "segsweep/stats.hpp"
#include "segsweep/sweep.hpp"

namespace segsweep {

struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
};

// Box = IQR, whiskers reach the most extreme values within 1.5 IQR of the
// box, everything beyond is an outlier.
BoxStats box_stats(std::span<const double> values);

// One box per threshold over the unit-level mean DSC values; y axis [0, 1].
std::string dsc_boxplot_svg(const std::vector<double>& thresholds, const std::vector<std::vector<double>>& samples,
                            const std::string& title);

// Grouped bars per threshold: volume-optimal and DSC-optimal counts.
std::string optimal_histogram_svg(const OptimalHistogram& histogram);

// Percent difference against mean volume, with mean line, limits of
// agreement and the +-band shading.
std::string bland_altman_svg(const BlandAltmanResult& result, const std::string& title);

} // namespace segsweep
