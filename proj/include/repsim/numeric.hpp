#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace repsim {

/// Row-major so that a stimulus is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Degeneracy thresholds. These are surfaced verbatim in error messages.
inline constexpr double kMinRowNorm = 1e-12;
inline constexpr double kMinPairDistance = 1e-15;
inline constexpr double kMinVariance = 1e-30;
inline constexpr double kMinSelfHsic = 1e-30;

/// Neumaier-compensated accumulator. Adds are order dependent, so callers
/// must feed terms in a fixed order to keep results reproducible.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean computed relative to the first element. A constant sequence yields
/// its value exactly, which keeps centered constant kernels exactly zero.
inline double shifted_mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  const double shift = values.front();
  CompensatedSum acc;
  for (double v : values) acc.add(v - shift);
  return shift + acc.value() / static_cast<double>(values.size());
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace repsim
