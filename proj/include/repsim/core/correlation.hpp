#pragma once

#include <span>
#include <vector>

namespace repsim {

/// Pearson correlation, clamped to [-1, 1]. Throws ConstantVector when
/// either input has (population) variance <= kMinVariance, and
/// DimensionMismatch on unequal or too-short inputs.
double pearson(std::span<const double> u, std::span<const double> v);

/// Pearson correlation of average-tie ranks.
double spearman(std::span<const double> u, std::span<const double> v);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace repsim
