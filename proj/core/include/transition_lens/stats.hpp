#pragma once

#include <optional>
#include <span>
#include <vector>

namespace tlens::stats {

double mean(std::span<const double> x);
/// Median of a copy of `x`; averages the two middle values for even sizes.
double median(std::span<const double> x);
/// Ranks starting at 1, ties receive their average rank.
std::vector<double> ranks(std::span<const double> x);

/// Pearson correlation; nullopt when either side has zero variance or n < 2.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);
/// Two-sided p-value of a standard-normal test statistic.
double two_sided_p(double z);

}  // namespace tlens::stats
