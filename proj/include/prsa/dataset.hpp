#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/core.hpp"

namespace prsa {

enum class DatasetSchema {
  records,  // examples required, ground-truth prompt optional
  labeled,  // every record must also carry its ground-truth prompt
};

/// Records in file order plus a grouping by normalized category.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<PromptRecord> records);

  const std::vector<PromptRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::vector<Category> categories() const;
  std::vector<PromptRecord> in_category(const Category& category) const;
  const PromptRecord* find(std::string_view id) const;

  /// Non-fatal notes gathered while loading (e.g. unknown categories).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.records_ == b.records_; }

 private:
  friend Dataset parse_dataset(std::string_view, DatasetSchema);

  std::vector<PromptRecord> records_;
  std::map<Category, std::vector<std::size_t>> by_category_;
  std::vector<std::string> warnings_;
};

/// Parses line-delimited JSON records. Blank lines are skipped.
/// Throws DatasetError carrying the 1-based line number.
Dataset parse_dataset(std::string_view content, DatasetSchema schema = DatasetSchema::records);

Dataset load_dataset(const std::filesystem::path& path,
                     DatasetSchema schema = DatasetSchema::records);

/// One JSON object per line, file order preserved.
std::string serialize_dataset(const Dataset& dataset);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Lists invariant violations; empty iff the record is valid on its own.
std::vector<std::string> validate_record(const PromptRecord& record);

}  // namespace prsa
