#include "repsim/store/sampling.hpp"

#include "repsim/error.hpp"
#include "repsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repsim {
namespace {

// Members of each class in row order.
std::vector<std::vector<std::size_t>> members_by_class(const LabelVector& labels) {
  std::vector<std::vector<std::size_t>> members(labels.num_classes());
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  return members;
}

// Moves the first `take` entries of a seeded Fisher-Yates shuffle to the
// front. The prefix for a given take does not depend on larger takes.
void shuffle_prefix(std::vector<std::size_t>& v, std::size_t take, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < take && i + 1 < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(v[i], v[j]);
  }
}

}  // namespace

LabelVector::LabelVector(std::vector<std::int64_t> labels, std::size_t num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || static_cast<std::uint64_t>(labels_[i]) >= num_classes_)
      throw Error(Errc::OutOfDomain,
                  "label " + std::to_string(labels_[i]) + " at index " + std::to_string(i) +
                      " is outside [0, " + std::to_string(num_classes_) + ")",
                  {i});
  }
}

std::vector<std::size_t> LabelVector::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (std::int64_t l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

std::vector<std::size_t> stratified_quotas(std::span<const std::size_t> counts, std::size_t target) {
  std::vector<std::size_t> quota(counts.size(), 0);
  // Open classes ordered by (size desc, index asc); that order decides who
  // receives leftover slots.
  std::vector<std::size_t> open;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0) open.push_back(c);
  std::stable_sort(open.begin(), open.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

  std::size_t remaining = target;
  while (!open.empty() && remaining > 0) {
    const std::size_t base = remaining / open.size();
    const std::size_t extra = remaining % open.size();
    std::vector<std::size_t> still_open;
    bool saturated = false;
    for (std::size_t r = 0; r < open.size(); ++r) {
      const std::size_t c = open[r];
      if (counts[c] <= base + (r < extra ? 1 : 0)) {
        quota[c] = counts[c];
        remaining -= counts[c];
        saturated = true;
      } else {
        still_open.push_back(c);
      }
    }
    if (!saturated) {
      for (std::size_t r = 0; r < open.size(); ++r) quota[open[r]] = base + (r < extra ? 1 : 0);
      break;
    }
    open = std::move(still_open);
  }
  return quota;
}

SampleIndexSet stratified_subsample(const LabelVector& labels, std::size_t target_n, std::uint64_t seed) {
  if (labels.size() == 0) throw Error(Errc::EmptyDataset, "cannot subsample an empty label vector");
  if (target_n == 0) throw Error(Errc::InvalidArgument, "target_n must be positive");

  auto members = members_by_class(labels);
  std::vector<std::size_t> counts(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) counts[c] = members[c].size();
  const std::vector<std::size_t> quota = stratified_quotas(counts, target_n);

  SampleIndexSet out;
  out.seed = seed;
  out.kind = SampleIndexSet::Kind::Stratified;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (quota[c] == 0) continue;
    shuffle_prefix(members[c], quota[c], derive_seed(seed, c));
    out.indices.insert(out.indices.end(), members[c].begin(),
                       members[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

SampleIndexSet uniform_subsample(std::size_t n, std::size_t target_n, std::uint64_t seed) {
  return stratified_subsample(LabelVector(std::vector<std::int64_t>(n, 0), 1), target_n, seed);
}

SampleIndexSet bootstrap_indices(std::size_t n, std::size_t size, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::EmptyDataset, "cannot resample from zero rows");
  SampleIndexSet out;
  out.seed = seed;
  out.kind = SampleIndexSet::Kind::Bootstrap;
  out.indices.resize(size);
  Rng rng(seed);
  for (auto& idx : out.indices) idx = static_cast<std::size_t>(rng.below(n));
  return out;
}

TrainValidationSplit stratified_split(const LabelVector& labels, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error(Errc::InvalidArgument, "validation fraction must lie in [0, 1]");
  auto members = members_by_class(labels);
  TrainValidationSplit out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m.size())));
    shuffle_prefix(m, held, derive_seed(seed, c));
    out.validation.insert(out.validation.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(held));
    out.train.insert(out.train.end(), m.begin() + static_cast<std::ptrdiff_t>(held), m.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

}  // namespace repsim
