#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

#include "prsa/error.hpp"
#include "prsa/mutation.hpp"

namespace fs = std::filesystem;

namespace prsa {

namespace {

std::string slug(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    out += (std::isalnum(c) || c == '-' || c == '.') ? static_cast<char>(std::tolower(c)) : '_';
  }
  return out.empty() ? "_" : out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

}  // namespace

AttentionStore::AttentionStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path AttentionStore::key_dir(const Category& category, const std::string& model_tag) const {
  return dir_ / (slug(category.name()) + "__" + slug(model_tag));
}

json AttentionStore::read_index(const fs::path& key_dir) const {
  const fs::path index = key_dir / "index.json";
  if (!fs::exists(index)) return json{{"versions", json::array()}};
  return read_json(index);
}

int AttentionStore::put(const Attention& attention) {
  if (attention.category.empty()) throw PreconditionError("attention store: attention has no category");
  std::unique_lock lock(mu_);
  const fs::path kd = key_dir(attention.category, attention.model_tag);
  fs::create_directories(kd);
  json index = read_index(kd);
  const int version = static_cast<int>(index["versions"].size()) + 1;
  const std::string file = "v" + std::to_string(version) + ".json";
  write_atomic(kd / file, json(attention).dump(2) + "\n");

  const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  index["category"] = attention.category.name();
  index["model_tag"] = attention.model_tag;
  index["versions"].push_back({{"version", version}, {"file", file}, {"id", attention.id}, {"stored_at", now}});
  write_atomic(kd / "index.json", index.dump(2) + "\n");
  return version;
}

Attention AttentionStore::get(const Category& category, const std::string& model_tag) const {
  std::shared_lock lock(mu_);
  const fs::path kd = key_dir(category, model_tag);
  const json index = read_index(kd);
  if (index["versions"].empty()) {
    throw AttentionMissingError("attention missing for category '" + category.name() + "' and model '" +
                                model_tag + "'");
  }
  return read_json(kd / index["versions"].back().at("file").get<std::string>()).get<Attention>();
}

std::vector<Attention> AttentionStore::history(const Category& category, const std::string& model_tag) const {
  std::shared_lock lock(mu_);
  const fs::path kd = key_dir(category, model_tag);
  const json index = read_index(kd);
  std::vector<Attention> out;
  for (const auto& v : index["versions"]) {
    out.push_back(read_json(kd / v.at("file").get<std::string>()).get<Attention>());
  }
  return out;
}

}  // namespace prsa
