#include "repsim/analysis/model_set.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <set>

namespace repsim {
namespace {

template <class E>
void add_by_value(const std::vector<ModelMeta>& registry, const char* attribute, std::initializer_list<E> values,
                  E ModelMeta::*field, std::vector<ModelSet>& out) {
  for (E v : values) {
    ModelSet s;
    s.set_id = std::string(attribute) + "=" + std::string(to_string(v));
    s.selector = std::make_pair(std::string(attribute), std::string(to_string(v)));
    for (const auto& m : registry)
      if (m.*field == v) s.members.push_back(m.model_id);
    if (!s.members.empty()) out.push_back(std::move(s));
  }
}

}  // namespace

ModelSet make_model_set(std::string set_id, std::vector<std::string> members) {
  if (members.empty()) throw Error(Errc::EmptyResultSet, "model set '" + set_id + "' has no members");
  std::set<std::string_view> seen;
  for (const auto& m : members)
    if (!seen.insert(m).second)
      throw Error(Errc::DuplicateMember, "model '" + m + "' appears twice in set '" + set_id + "'");
  return {std::move(set_id), std::move(members), std::nullopt};
}

Attribute parse_attribute(std::string_view name) {
  if (name == "objective") return Attribute::Objective;
  if (name == "training_data") return Attribute::TrainingData;
  if (name == "architecture") return Attribute::Architecture;
  if (name == "size") return Attribute::Size;
  if (name == "all") return Attribute::All;
  throw Error(Errc::UnknownAttribute, "unknown model attribute '" + std::string(name) +
                                          "' (objective, training_data, architecture, size, all)");
}

std::string_view to_string(Attribute a) noexcept {
  switch (a) {
    case Attribute::Objective: return "objective";
    case Attribute::TrainingData: return "training_data";
    case Attribute::Architecture: return "architecture";
    case Attribute::Size: return "size";
    case Attribute::All: return "all";
  }
  return "?";
}

std::vector<ModelSet> build_model_sets(const std::vector<ModelMeta>& registry, Attribute attribute) {
  if (registry.empty()) throw Error(Errc::EmptyResultSet, "empty model registry");
  std::vector<ModelSet> out;
  switch (attribute) {
    case Attribute::All: {
      ModelSet s{"all", {}, std::make_pair(std::string("all"), std::string("all"))};
      for (const auto& m : registry) s.members.push_back(m.model_id);
      out.push_back(std::move(s));
      break;
    }
    case Attribute::Objective:
      add_by_value(registry, "objective", {Objective::ImgTxt, Objective::SSL, Objective::Sup},
                   &ModelMeta::objective, out);
      break;
    case Attribute::TrainingData:
      add_by_value(registry, "training_data",
                   {TrainingData::IN1k, TrainingData::IN21k, TrainingData::Large, TrainingData::XLarge},
                   &ModelMeta::training_data_class, out);
      break;
    case Attribute::Architecture:
      add_by_value(registry, "architecture", {ArchitectureClass::CNN, ArchitectureClass::TX},
                   &ModelMeta::architecture_class, out);
      break;
    case Attribute::Size:
      add_by_value(registry, "size", {SizeClass::Small, SizeClass::Medium, SizeClass::Large, SizeClass::XLarge},
                   &ModelMeta::size_class, out);
      break;
  }
  return out;
}

std::vector<ModelPair> enumerate_pairs(const ModelSet& theta, const ModelSet& phi) {
  std::set<ModelPair> pairs;
  for (const auto& a : theta.members)
    for (const auto& b : phi.members) {
      if (a == b) continue;
      pairs.insert(a < b ? ModelPair{a, b} : ModelPair{b, a});
    }
  if (pairs.empty())
    throw Error(Errc::NoValidPairs, "no model pairs between '" + theta.set_id + "' and '" + phi.set_id + "'");
  return {pairs.begin(), pairs.end()};
}

std::vector<std::string> union_members(const std::vector<ModelSet>& sets) {
  std::set<std::string> all;
  for (const auto& s : sets) all.insert(s.members.begin(), s.members.end());
  return {all.begin(), all.end()};
}

}  // namespace repsim
