#pragma once

#include "repsim/store/registry.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace repsim {

struct ModelSet {
  std::string set_id;
  std::vector<std::string> members;
  /// (attribute, value) for generated sets, e.g. ("objective", "SSL").
  std::optional<std::pair<std::string, std::string>> selector;

  bool operator==(const ModelSet&) const = default;
};

/// Validated explicit set. Throws EmptyResultSet for no members and
/// DuplicateMember when an id repeats.
ModelSet make_model_set(std::string set_id, std::vector<std::string> members);

enum class Attribute { Objective, TrainingData, Architecture, Size, All };

/// "objective", "training_data", "architecture", "size", "all".
Attribute parse_attribute(std::string_view name);
std::string_view to_string(Attribute a) noexcept;

/// One set per attribute value that occurs in the registry, in the value
/// order of the enum, members in registry order; `All` gives a single set.
/// Set ids look like "objective=SSL" and "all". Throws EmptyResultSet on an
/// empty registry.
std::vector<ModelSet> build_model_sets(const std::vector<ModelMeta>& registry, Attribute attribute);

using ModelPair = std::pair<std::string, std::string>;

/// Unordered pairs {a, b}, a in theta, b in phi, a != b, each once as
/// (min, max) by id, sorted. Throws NoValidPairs when the list is empty.
std::vector<ModelPair> enumerate_pairs(const ModelSet& theta, const ModelSet& phi);

/// Sorted union of the members of all sets.
std::vector<std::string> union_members(const std::vector<ModelSet>& sets);

}  // namespace repsim
