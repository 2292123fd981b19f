#include "clarifystl/dataset/record.hpp"

#include <fstream>

namespace clarifystl::dataset {

namespace {

constexpr const char* kKnownFields[] = {"id",     "nl",     "stl",       "label",
                                        "defect_types", "reference_query", "parent_id"};

bool known_field(const std::string& k) {
  for (const char* f : kKnownFields) {
    if (k == f) return true;
  }
  return false;
}

std::optional<std::string> optional_string(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

} // namespace

const char* to_string(DefectType t) {
  switch (t) {
    case DefectType::Temporal: return "Temporal";
    case DefectType::Numerical: return "Numerical";
    case DefectType::ConditionalLogic: return "ConditionalLogic";
    case DefectType::Referential: return "Referential";
    case DefectType::Semantic: return "Semantic";
  }
  return "?";
}

const char* slug(DefectType t) {
  switch (t) {
    case DefectType::Temporal: return "temporal";
    case DefectType::Numerical: return "numerical";
    case DefectType::ConditionalLogic: return "conditional";
    case DefectType::Referential: return "referential";
    case DefectType::Semantic: return "semantic";
  }
  return "?";
}

DefectType defect_type_from_string(std::string_view s) {
  for (DefectType t : kAllDefectTypes) {
    if (s == to_string(t) || s == slug(t)) return t;
  }
  throw DatasetError("unknown defect type '" + std::string(s) + "'");
}

bool is_vagueness(DefectType t) {
  return t == DefectType::Temporal || t == DefectType::Numerical ||
         t == DefectType::ConditionalLogic;
}

const char* to_string(Label l) {
  switch (l) {
    case Label::Clean: return "clean";
    case Label::Vague: return "vague";
    case Label::Ambiguous: return "ambiguous";
  }
  return "?";
}

Label label_from_string(std::string_view s) {
  if (s == "clean") return Label::Clean;
  if (s == "vague") return Label::Vague;
  if (s == "ambiguous") return Label::Ambiguous;
  throw DatasetError("unknown label '" + std::string(s) + "'");
}

void DatasetRecord::validate() const {
  if (id.empty()) throw DatasetError("record without id");
  switch (label) {
    case Label::Clean:
      if (!defect_types.empty()) throw DatasetError(id + ": clean record lists defect types");
      return;
    case Label::Vague:
    case Label::Ambiguous: {
      if (defect_types.empty()) throw DatasetError(id + ": defective record lists no type");
      const bool want_vague = label == Label::Vague;
      for (DefectType t : defect_types) {
        if (is_vagueness(t) != want_vague) {
          throw DatasetError(id + ": defect type " + to_string(t) + " does not fit label " +
                             to_string(label));
        }
      }
      return;
    }
  }
}

nlohmann::ordered_json to_json(const DatasetRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["nl"] = r.nl;
  j["stl"] = r.stl;
  j["label"] = to_string(r.label);
  auto types = nlohmann::ordered_json::array();
  for (DefectType t : r.defect_types) types.push_back(to_string(t));
  j["defect_types"] = std::move(types);
  j["reference_query"] = r.reference_query ? nlohmann::ordered_json(*r.reference_query) : nullptr;
  j["parent_id"] = r.parent_id ? nlohmann::ordered_json(*r.parent_id) : nullptr;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

DatasetRecord record_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw DatasetError("record is not an object");
  DatasetRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.nl = j.at("nl").get<std::string>();
    r.stl = j.value("stl", "");
    r.label = label_from_string(j.value("label", "clean"));
    if (j.contains("defect_types")) {
      for (const auto& t : j["defect_types"]) {
        r.defect_types.insert(defect_type_from_string(t.get<std::string>()));
      }
    }
    r.reference_query = optional_string(j, "reference_query");
    r.parent_id = optional_string(j, "parent_id");
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("malformed record: ") + e.what());
  }
  for (const auto& [k, v] : j.items()) {
    if (!known_field(k)) r.extra[k] = v;
  }
  r.validate();
  return r;
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::ordered_json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DatasetError& e) {
      throw DatasetError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

} // namespace clarifystl::dataset
