#include "prsa/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa {

Dataset::Dataset(std::vector<PromptRecord> records) : records_(std::move(records)) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!ids.insert(records_[i].id).second) {
      throw DatasetError(0, "duplicate id '" + records_[i].id + "'");
    }
    by_category_[records_[i].category].push_back(i);
  }
}

std::vector<Category> Dataset::categories() const {
  std::vector<Category> out;
  out.reserve(by_category_.size());
  for (const auto& [c, _] : by_category_) out.push_back(c);
  return out;
}

std::vector<PromptRecord> Dataset::in_category(const Category& category) const {
  std::vector<PromptRecord> out;
  if (auto it = by_category_.find(category); it != by_category_.end()) {
    for (auto i : it->second) out.push_back(records_[i]);
  }
  return out;
}

const PromptRecord* Dataset::find(std::string_view id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::vector<std::string> validate_record(const PromptRecord& record) {
  std::vector<std::string> issues;
  if (record.id.empty()) issues.emplace_back("id empty");
  if (record.category.empty()) issues.emplace_back("category empty");
  if (record.examples.empty()) issues.emplace_back("examples empty");
  for (std::size_t i = 0; i < record.examples.size(); ++i) {
    if (text::trim(record.examples[i].output).empty()) {
      issues.push_back("example " + std::to_string(i) + " output empty");
    }
  }
  return issues;
}

Dataset parse_dataset(std::string_view content, DatasetSchema schema) {
  std::vector<PromptRecord> records;
  std::vector<std::size_t> line_of;
  std::vector<std::string> warnings;
  std::set<std::string> ids;
  std::size_t line_no = 0;

  for (const auto& line : text::split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(line_no, std::string("parse error: ") + e.what());
    }
    if (!j.is_object()) throw DatasetError(line_no, "record is not an object");

    PromptRecord record;
    try {
      record = j.get<PromptRecord>();
    } catch (const json::exception& e) {
      throw DatasetError(line_no, std::string("schema error: ") + e.what());
    }

    if (auto issues = validate_record(record); !issues.empty()) {
      throw DatasetError(line_no, "invalid record '" + record.id + "': " + issues.front());
    }
    if (schema == DatasetSchema::labeled && !record.prompt_text) {
      throw DatasetError(line_no, "record '" + record.id + "' lacks a ground-truth prompt");
    }
    if (!ids.insert(record.id).second) {
      throw DatasetError(line_no, "duplicate id '" + record.id + "'");
    }
    if (!record.category.is_known()) {
      warnings.push_back("line " + std::to_string(line_no) + ": unknown category '" +
                         record.category.name() + "'");
    }
    records.push_back(std::move(record));
  }

  Dataset ds(std::move(records));
  ds.warnings_ = std::move(warnings);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetSchema schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "cannot open dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), schema);
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& r : dataset.records()) {
    out += json(r).dump();
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError(0, "cannot write dataset " + path.string());
  out << serialize_dataset(dataset);
}

}  // namespace prsa
