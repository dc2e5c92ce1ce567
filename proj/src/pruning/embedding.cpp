#include "prsa/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa {

EmbeddingIndex::EmbeddingIndex(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw PreconditionError("embedding: dimension must be positive");
}

void EmbeddingIndex::add(std::string word, std::vector<float> vector) {
  if (vector.size() != dim_) {
    throw PreconditionError("embedding: vector for '" + word + "' has dimension " + std::to_string(vector.size()) +
                            ", expected " + std::to_string(dim_));
  }
  // Keys are lowercased; an exact lowercase entry wins over a cased variant.
  std::string key = text::to_lower(word);
  if (key != word) {
    vectors_.try_emplace(std::move(key), std::move(vector));
  } else {
    vectors_.insert_or_assign(std::move(key), std::move(vector));
  }
}

const std::vector<float>* EmbeddingIndex::find(std::string_view word) const {
  const auto it = vectors_.find(text::to_lower(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::optional<double> EmbeddingIndex::similarity(std::string_view a, std::string_view b) const {
  const auto* va = find(a);
  const auto* vb = find(b);
  if (!va || !vb) return std::nullopt;
  const double c = cosine(*va, *vb);
  if (std::isnan(c)) return std::nullopt;
  return c;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw PreconditionError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nan("");
  return dot / std::sqrt(na * nb);
}

EmbeddingIndex EmbeddingIndex::parse_text(std::istream& in) {
  std::optional<EmbeddingIndex> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<float> v;
    float x = 0.0f;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw PreconditionError("embedding: bad number on line " + std::to_string(line_no));
    if (line_no == 1 && v.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) {
      index.emplace(static_cast<std::size_t>(v[0]));  // "count dim" header
      continue;
    }
    if (v.empty()) throw PreconditionError("embedding: no vector on line " + std::to_string(line_no));
    if (!index) index.emplace(v.size());
    index->add(std::move(word), std::move(v));
  }
  if (!index) throw PreconditionError("embedding: empty file");
  return std::move(*index);
}

EmbeddingIndex EmbeddingIndex::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file " + path.string());
  return parse_text(in);
}

EmbeddingIndex EmbeddingIndex::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open embedding file " + path.string());
  std::size_t count = 0, dim = 0;
  if (!(in >> count >> dim) || dim == 0) throw PreconditionError("embedding: bad binary header");
  in.get();
  EmbeddingIndex index(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::string word;
    char c = 0;
    while (in.get(c) && c != ' ') {
      if (c != '\n') word += c;
    }
    std::vector<float> v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw PreconditionError("embedding: truncated binary file at entry " + std::to_string(i));
    index.add(std::move(word), std::move(v));
  }
  return index;
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? load_binary(path) : load_text(path);
}

}  // namespace prsa
