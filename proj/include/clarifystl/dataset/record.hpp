#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clarifystl/error.hpp"

namespace clarifystl::dataset {

class DatasetError : public Error {
 public:
  using Error::Error;
};

enum class DefectType { Temporal, Numerical, ConditionalLogic, Referential, Semantic };

inline constexpr DefectType kAllDefectTypes[] = {
    DefectType::Temporal, DefectType::Numerical, DefectType::ConditionalLogic,
    DefectType::Referential, DefectType::Semantic};

const char* to_string(DefectType t);
/// Lower-case form used in ids and CLI flags ("temporal", "conditional", ...).
const char* slug(DefectType t);
/// Accepts either the canonical name or the slug. Throws DatasetError.
DefectType defect_type_from_string(std::string_view s);
bool is_vagueness(DefectType t);

enum class Label { Clean, Vague, Ambiguous };

const char* to_string(Label l);
Label label_from_string(std::string_view s);

struct DatasetRecord {
  std::string id;
  std::string nl;
  /// Formula text; empty for NL-only records.
  std::string stl;
  Label label = Label::Clean;
  std::set<DefectType> defect_types;
  std::optional<std::string> reference_query;
  std::optional<std::string> parent_id;
  /// Fields not listed above, kept verbatim for round-trips.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  /// Throws DatasetError when the label and defect types disagree.
  void validate() const;

  bool operator==(const DatasetRecord&) const = default;
};

nlohmann::ordered_json to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::ordered_json& j);

/// One JSON object per line; blank lines are skipped.
std::vector<DatasetRecord> read_dataset(std::istream& in);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);

} // namespace clarifystl::dataset
