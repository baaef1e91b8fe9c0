#pragma once

#include <span>

namespace segsweep {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_sd(std::span<const double> xs);
// Linear-interpolation quantile between order statistics (h = (n - 1) q).
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);
// Q3 - Q1 under the same quantile rule.
double iqr(std::span<const double> xs);

} // namespace segsweep
