#include "repsim/core/correlation.hpp"

#include "repsim/error.hpp"
#include "repsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace repsim {

double pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::DimensionMismatch, "pearson inputs differ in length (" +
                                             std::to_string(u.size()) + " vs " +
                                             std::to_string(v.size()) + ")");
  }
  if (u.size() < 2) {
    throw Error(Errc::DimensionMismatch, "pearson needs at least two observations");
  }
  const double mu = shifted_mean(u);
  const double mv = shifted_mean(v);
  CompensatedSum suv;
  CompensatedSum suu;
  CompensatedSum svv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suv.add(du * dv);
    suu.add(du * du);
    svv.add(dv * dv);
  }
  const auto count = static_cast<double>(u.size());
  if (suu.value() / count <= kMinVariance || svv.value() / count <= kMinVariance) {
    throw Error(Errc::ConstantVector, "input vector has variance <= 1e-30");
  }
  // sqrt of the product: identical inputs then give exactly 1
  const double r = suv.value() / std::sqrt(suu.value() * svv.value());
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // positions start..end-1 hold ranks start+1..end
    const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

double spearman(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::DimensionMismatch, "spearman inputs differ in length");
  }
  const auto ru = average_ranks(u);
  const auto rv = average_ranks(v);
  return pearson(ru, rv);
}

}  // namespace repsim
