#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace repsim {

/// Class labels of one (dataset, split): values in [0, num_classes).
class LabelVector {
 public:
  /// Throws OutOfDomain(index) for a label outside [0, num_classes).
  LabelVector(std::vector<std::int64_t> labels, std::size_t num_classes);

  const std::vector<std::int64_t>& values() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::int64_t operator[](std::size_t i) const noexcept { return labels_[i]; }

  /// Per-class member counts, length num_classes.
  std::vector<std::size_t> class_counts() const;

  bool operator==(const LabelVector&) const = default;

 private:
  std::vector<std::int64_t> labels_;
  std::size_t num_classes_;
};

struct SampleIndexSet {
  enum class Kind { Stratified, Bootstrap };

  std::vector<std::size_t> indices;
  std::uint64_t seed = 0;
  Kind kind = Kind::Stratified;
};

/// Per-class quotas for a stratified draw of `target` rows from classes with
/// `counts` members. Every non-empty class gets floor(T/C); the T mod C
/// leftover goes one each to the largest classes (ties: lower index). A
/// class that cannot fill its quota gives all members and the shortfall is
/// redistributed over the rest by the same rule. Sum = min(target, total).
std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> counts, std::size_t target);

/// Class-balanced subsample without replacement. Within class c the members
/// are taken in the order of a Fisher-Yates shuffle seeded with
/// derive_seed(seed, c), so a draw of size T is contained in any larger
/// draw whose quotas dominate it. Output indices are sorted and unique.
/// Throws EmptyDataset for no labels and InvalidArgument for target_n = 0.
SampleIndexSet stratified_subsample(const LabelVector& labels, std::size_t target_n, std::uint64_t seed);

/// Uniform subsample without replacement for unlabeled data (one class).
SampleIndexSet uniform_subsample(std::size_t n, std::size_t target_n, std::uint64_t seed);

/// `size` uniform draws with replacement from [0, n), in draw order.
SampleIndexSet bootstrap_indices(std::size_t n, std::size_t size, std::uint64_t seed);

struct TrainValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Holds out round(fraction * count) members of every class, chosen by the
/// same per-class shuffle as stratified_subsample. Both lists are sorted.
TrainValidationSplit stratified_split(const LabelVector& labels, double fraction, std::uint64_t seed);

}  // namespace repsim
