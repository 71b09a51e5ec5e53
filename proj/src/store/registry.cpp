#include "repsim/store/registry.hpp"

#include "repsim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace repsim {
namespace {

using json = nlohmann::ordered_json;

template <class E, std::size_t N>
using Spellings = std::array<std::pair<E, std::string_view>, N>;

constexpr Spellings<Objective, 3> kObjective{{
    {Objective::ImgTxt, "Img-Txt"}, {Objective::SSL, "SSL"}, {Objective::Sup, "Sup"}}};
constexpr Spellings<TrainingData, 4> kTrainingData{{{TrainingData::IN1k, "IN1k"},
                                                    {TrainingData::IN21k, "IN21k"},
                                                    {TrainingData::Large, "Large"},
                                                    {TrainingData::XLarge, "XLarge"}}};
constexpr Spellings<ArchitectureClass, 2> kArchitecture{
    {{ArchitectureClass::CNN, "CNN"}, {ArchitectureClass::TX, "TX"}}};
constexpr Spellings<SizeClass, 4> kSize{{{SizeClass::Small, "small"},
                                         {SizeClass::Medium, "medium"},
                                         {SizeClass::Large, "large"},
                                         {SizeClass::XLarge, "xlarge"}}};
constexpr Spellings<DatasetCategory, 4> kCategory{{{DatasetCategory::NaturalMulti, "natural-multi"},
                                                   {DatasetCategory::NaturalSingle, "natural-single"},
                                                   {DatasetCategory::Specialized, "specialized"},
                                                   {DatasetCategory::Structured, "structured"}}};

template <class E, std::size_t N>
std::string_view spell(const Spellings<E, N>& table, E v) noexcept {
  for (const auto& [e, s] : table)
    if (e == v) return s;
  return "?";
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(Errc::FormatError, where + ": " + what);
}

template <class E, std::size_t N>
E parse_enum(const Spellings<E, N>& table, const json& v, const std::string& where,
             const char* field) {
  if (!v.is_string()) schema_error(where, std::string(field) + " must be a string");
  const auto s = v.get<std::string>();
  for (const auto& [e, name] : table)
    if (name == s) return e;
  std::string allowed;
  for (const auto& [e, name] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  schema_error(where, std::string(field) + " '" + s + "' is not one of {" + allowed + "}");
}

void require_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "entry is not an object");
  for (const char* k : keys)
    if (!obj.contains(k)) schema_error(where, std::string("missing field '") + k + "'");
  for (const auto& item : obj.items())
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; }) ==
        keys.end())
      schema_error(where, "unexpected field '" + item.key() + "'");
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string() || v.get<std::string>().empty())
    schema_error(where, std::string(key) + " must be a non-empty string");
  return v.get<std::string>();
}

std::uint64_t positive_field(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_unsigned() ? v.get<std::uint64_t>() == 0 : v.get<std::int64_t>() <= 0))
    schema_error(where, std::string(key) + " must be a positive integer");
  return v.get<std::uint64_t>();
}

json parse_array(std::string_view text, const char* what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::FormatError, std::string(what) + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(Errc::FormatError, std::string(what) + ": top level must be an array");
  return doc;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(Objective v) noexcept { return spell(kObjective, v); }
std::string_view to_string(TrainingData v) noexcept { return spell(kTrainingData, v); }
std::string_view to_string(ArchitectureClass v) noexcept { return spell(kArchitecture, v); }
std::string_view to_string(SizeClass v) noexcept { return spell(kSize, v); }
std::string_view to_string(DatasetCategory v) noexcept { return spell(kCategory, v); }

Registry::Registry(std::vector<ModelMeta> models, std::vector<DatasetMeta> datasets)
    : models_(std::move(models)), datasets_(std::move(datasets)) {
  std::set<std::string_view> seen;
  for (const auto& m : models_) {
    if (m.model_id.empty()) throw Error(Errc::FormatError, "empty model_id");
    if (m.param_count == 0) throw Error(Errc::FormatError, m.model_id + ": param_count must be positive");
    if (!seen.insert(m.model_id).second) throw Error(Errc::FormatError, "duplicate model_id '" + m.model_id + "'");
  }
  seen.clear();
  for (const auto& d : datasets_) {
    if (d.dataset_id.empty()) throw Error(Errc::FormatError, "empty dataset_id");
    if (d.num_classes == 0) throw Error(Errc::FormatError, d.dataset_id + ": num_classes must be positive");
    if (!seen.insert(d.dataset_id).second)
      throw Error(Errc::FormatError, "duplicate dataset_id '" + d.dataset_id + "'");
  }
}

std::vector<ModelMeta> Registry::parse_models(std::string_view text) {
  const json doc = parse_array(text, "models.json");
  std::vector<ModelMeta> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    std::string where = "models.json[" + std::to_string(i) + "]";
    require_keys(e,
                 {"model_id", "objective", "training_data_class", "architecture_class", "size_class",
                  "param_count", "rep_layer"},
                 where);
    ModelMeta m;
    m.model_id = string_field(e, "model_id", where);
    where += " (" + m.model_id + ")";
    m.objective = parse_enum(kObjective, e.at("objective"), where, "objective");
    m.training_data_class = parse_enum(kTrainingData, e.at("training_data_class"), where, "training_data_class");
    m.architecture_class = parse_enum(kArchitecture, e.at("architecture_class"), where, "architecture_class");
    m.size_class = parse_enum(kSize, e.at("size_class"), where, "size_class");
    m.param_count = positive_field(e, "param_count", where);
    m.rep_layer = string_field(e, "rep_layer", where);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<DatasetMeta> Registry::parse_datasets(std::string_view text) {
  const json doc = parse_array(text, "datasets.json");
  std::vector<DatasetMeta> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    std::string where = "datasets.json[" + std::to_string(i) + "]";
    require_keys(e, {"dataset_id", "category", "num_classes"}, where);
    DatasetMeta d;
    d.dataset_id = string_field(e, "dataset_id", where);
    where += " (" + d.dataset_id + ")";
    d.category = parse_enum(kCategory, e.at("category"), where, "category");
    d.num_classes = positive_field(e, "num_classes", where);
    out.push_back(std::move(d));
  }
  return out;
}

std::string Registry::dump_models(const std::vector<ModelMeta>& models) {
  json arr = json::array();
  for (const auto& m : models) {
    json o = json::object();
    o["model_id"] = m.model_id;
    o["objective"] = to_string(m.objective);
    o["training_data_class"] = to_string(m.training_data_class);
    o["architecture_class"] = to_string(m.architecture_class);
    o["size_class"] = to_string(m.size_class);
    o["param_count"] = m.param_count;
    o["rep_layer"] = m.rep_layer;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string Registry::dump_datasets(const std::vector<DatasetMeta>& datasets) {
  json arr = json::array();
  for (const auto& d : datasets) {
    json o = json::object();
    o["dataset_id"] = d.dataset_id;
    o["category"] = to_string(d.category);
    o["num_classes"] = d.num_classes;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

Registry Registry::load(const std::filesystem::path& models_json,
                        const std::filesystem::path& datasets_json) {
  return Registry(parse_models(read_text(models_json)), parse_datasets(read_text(datasets_json)));
}

const ModelMeta& Registry::model(std::string_view id) const {
  for (const auto& m : models_)
    if (m.model_id == id) return m;
  throw Error(Errc::UnknownModel, "model '" + std::string(id) + "' is not in the registry");
}

const DatasetMeta& Registry::dataset(std::string_view id) const {
  for (const auto& d : datasets_)
    if (d.dataset_id == id) return d;
  throw Error(Errc::UnknownDataset, "dataset '" + std::string(id) + "' is not in the registry");
}

bool Registry::has_model(std::string_view id) const noexcept {
  return std::any_of(models_.begin(), models_.end(), [&](const auto& m) { return m.model_id == id; });
}

bool Registry::has_dataset(std::string_view id) const noexcept {
  return std::any_of(datasets_.begin(), datasets_.end(), [&](const auto& d) { return d.dataset_id == id; });
}

}  // namespace repsim
