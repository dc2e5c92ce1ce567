#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prsa {

/// Word vectors keyed by word. Lookups try the lowercased word first and
/// fall back to the exact spelling.
class EmbeddingIndex {
 public:
  explicit EmbeddingIndex(std::size_t dimension);

  /// Throws PreconditionError on a dimension mismatch.
  void add(std::string word, std::vector<float> vector);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  const std::vector<float>* find(std::string_view word) const;

  /// Cosine of two words, nullopt when either is missing or has zero norm.
  std::optional<double> similarity(std::string_view a, std::string_view b) const;

  /// "word v1 ... vD" lines with an optional "count dim" header.
  static EmbeddingIndex parse_text(std::istream& in);
  static EmbeddingIndex load_text(const std::filesystem::path& path);
  /// word2vec binary layout: "count dim\n" then word, space, dim float32.
  static EmbeddingIndex load_binary(const std::filesystem::path& path);
  /// Picks the loader by extension (.bin = binary).
  static EmbeddingIndex load(const std::filesystem::path& path);

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace prsa
