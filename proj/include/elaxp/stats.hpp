#pragma once

#include <optional>
#include <span>
#include <vector>

namespace elaxp::stats {

double mean(std::span<const double> v);
// Median; an even count yields the mean of the two middle values.
double median(std::span<const double> v);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sd(std::span<const double> v);
// Linear-interpolation quantile (R type 7).
double quantile(std::span<const double> v, double q);
// Pearson correlation; empty when either side has zero variance.
std::optional<double> correlation(std::span<const double> a, std::span<const double> b);

}  // namespace elaxp::stats
