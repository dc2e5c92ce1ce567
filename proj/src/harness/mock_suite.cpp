#include "prsa/mock_suite.hpp"

#include <fstream>
#include <sstream>

#include "prsa/mock_llm.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

struct PlannedRecord {
  std::string id;
  std::string prompt;
  std::vector<std::string> inputs;
  bool unrecoverable = false;
};

struct PlannedCategory {
  std::string name;
  std::string cluster_word;  // task word that sits near the category's subjects
  std::vector<PlannedRecord> mutation;
  std::vector<PlannedRecord> attack;
  std::vector<std::string> held_out;
};

const std::vector<PlannedCategory>& plan() {
  static const std::vector<PlannedCategory> categories = {
      {"ads",
       "",
       {{"ads-m1", "Write an advertising copy for the given product. Use a casual, colloquial tone. Start with a title. Include emojis. End with hashtags.", {"blender"}},
        {"ads-m2", "Write an advertising copy for the given product. Include emojis. End with hashtags.", {"laptop"}},
        {"ads-m3", "Write an advertising copy for the given product. Use a casual, colloquial tone. Start with a title.", {"sneakers"}}},
       {{"ads-1", "Write an engaging advertising copy for [product]. Use a casual tone, add a catchy title, include emojis and end with hashtags.", {"smartwatch", "headphones", "backpack"}},
        {"ads-2", "Create an advertising copy for the given product with emojis and hashtags.", {"coffee grinder", "sneakers", "blender"}},
        {"ads-3", "Write an advertising copy for the product. Start with a catchy title.", {"laptop", "smartwatch", "sneakers"}},
        {"ads-4", "Write an advertising copy for the given product. Add bullet points and some emojis.", {"headphones", "laptop", "backpack"}, true}},
       {"tablet", "camera", "jacket"}},
      {"email",
       "",
       {{"email-m1", "Write an email about the given topic. Use a formal tone. Organize it with section headings.", {"invoice"}},
        {"email-m2", "Write an email about the given topic. Use a formal tone. State the target audience.", {"conference"}},
        {"email-m3", "Write an email about the given topic. Organize it with section headings. State the target audience.", {"workshop"}}},
       {{"email-1", "Draft an email about the given topic in a formal tone and state the target audience.", {"webinar", "partnership", "invoice"}},
        {"email-2", "Write an email about {}. Organize it with clear sections.", {"conference", "workshop", "webinar"}},
        {"email-3", "Compose a formal email about the topic with section headings. State the audience.", {"partnership", "conference", "invoice"}},
        {"email-4", "Write a formal email about the given topic and include emojis.", {"workshop", "invoice", "webinar"}, true}},
       {"onboarding", "renewal", "survey"}},
      {"food",
       "recipe",
       {{"food-m1", "Write a recipe for the given dish. Add bullet points. Start with a title.", {"tacos"}},
        {"food-m2", "Write a recipe for the given dish. Add bullet points. Make it detailed and long.", {"risotto"}},
        {"food-m3", "Write a recipe for the given dish. Start with a title. Keep it short.", {"pancakes"}}},
       {{"food-1", "Write a recipe for the given dish with bullet points.", {"lasagna", "pancakes", "risotto"}},
        {"food-2", "Create a detailed recipe for [dish] and start with a title.", {"dumplings", "tacos", "lasagna"}},
        {"food-3", "Write a short recipe for the dish using a bullet list.", {"risotto", "dumplings", "pancakes"}},
        {"food-4", "Write a recipe for the given dish. Add bullet points and end with hashtags.", {"tacos", "lasagna", "dumplings"}, true}},
       {"curry", "omelette", "paella"}},
      {"travel",
       "guide",
       {{"travel-m1", "Write a travel guide for the given destination. Include emojis. Organize it with section headings.", {"Kyoto"}},
        {"travel-m2", "Write a travel guide for the given destination. Organize it with section headings. Make it detailed and long.", {"Lisbon"}},
        {"travel-m3", "Write a travel guide for the given destination. Include emojis. State the target audience.", {"Patagonia"}}},
       {{"travel-1", "Write a travel guide for the destination and include emojis.", {"Tokyo", "Lisbon", "Iceland"}},
        {"travel-2", "Create a detailed travel guide for [destination]. Organize it with section headings.", {"Kyoto", "Patagonia", "Tokyo"}},
        {"travel-3", "Write a travel guide for the given destination. State the target audience and add emojis.", {"Iceland", "Kyoto", "Lisbon"}},
        {"travel-4", "Write a travel guide for the destination with section headings in a casual tone.", {"Patagonia", "Tokyo", "Kyoto"}, true}},
       {"Barcelona", "Marrakesh", "Vancouver"}},
      {"music",
       "",
       {{"music-m1", "Write song lyrics about the given theme. Use a casual, colloquial tone. End with hashtags.", {"highway"}},
        {"music-m2", "Write song lyrics about the given theme. Start with a title. End with hashtags.", {"freedom"}},
        {"music-m3", "Write song lyrics about the given theme. Use a casual, colloquial tone. Keep it short.", {"midnight"}}},
       {{"music-1", "Write song lyrics about the given theme in a casual tone and end with hashtags.", {"ocean", "freedom", "midnight"}},
        {"music-2", "Write song lyrics about [theme]. Start with a title.", {"summer rain", "highway", "ocean"}},
        {"music-3", "Write short song lyrics about the theme and add hashtags.", {"midnight", "ocean", "highway"}},
        {"music-4", "Write song lyrics about the theme in a colloquial tone, then add bullet points.", {"freedom", "summer rain", "midnight"}, true}},
       {"sunrise", "memories", "thunder"}},
  };
  return categories;
}

constexpr float kClusterWeight = 0.6f;

std::shared_ptr<const EmbeddingIndex> build_embeddings() {
  // Axes: one per category cluster, then one per word.
  std::vector<std::pair<std::string, int>> words;  // word, cluster (-1 = none)
  std::set<std::string> seen;
  auto add = [&](const std::string& w, int cluster) {
    const std::string low = text::to_lower(w);
    if (seen.insert(low).second) words.emplace_back(low, cluster);
  };
  const auto& categories = plan();
  for (int c = 0; c < static_cast<int>(categories.size()); ++c) {
    const auto& cat = categories[static_cast<std::size_t>(c)];
    auto add_inputs = [&](const std::vector<PlannedRecord>& records) {
      for (const auto& r : records) {
        for (const auto& in : r.inputs) {
          for (const auto& w : text::word_tokens(in)) add(w, c);
        }
      }
    };
    add_inputs(cat.mutation);
    add_inputs(cat.attack);
    for (const auto& in : cat.held_out) {
      for (const auto& w : text::word_tokens(in)) add(w, c);
    }
  }
  // Instruction words: their own axis, unrelated to every subject.
  for (const auto& cat : categories) {
    for (const auto& r : cat.attack) {
      for (const auto& w : text::word_tokens(r.prompt)) {
        if (text::to_lower(w) != cat.cluster_word) add(w, -1);
      }
    }
  }
  for (Task t : {Task::ads, Task::email, Task::recipe, Task::travel, Task::lyrics, Task::generic}) {
    for (const auto& w : text::word_tokens(mock::task_phrase(t))) add(w, -1);
  }
  for (Feature f : mock::all_features()) {
    for (const auto& w : text::word_tokens(mock::directive_sentence(f))) add(w, -1);
  }

  const std::size_t clusters = categories.size();
  const std::size_t dim = clusters + words.size();
  auto index = std::make_shared<EmbeddingIndex>(dim);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<float> v(dim, 0.0f);
    v[clusters + i] = 1.0f;
    if (words[i].second >= 0) v[static_cast<std::size_t>(words[i].second)] = kClusterWeight;
    index->add(words[i].first, std::move(v));
  }
  // Task words that share a category's cluster axis.
  for (std::size_t c = 0; c < clusters; ++c) {
    if (categories[c].cluster_word.empty()) continue;
    std::vector<float> v(dim, 0.0f);
    v[c] = 1.0f;
    index->add(categories[c].cluster_word, std::move(v));
  }
  return index;
}

void save_embeddings(const EmbeddingIndex& index, const std::vector<std::string>& vocabulary,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << vocabulary.size() << " " << index.dimension() << "\n";
  for (const auto& w : vocabulary) {
    out << w;
    for (float x : *index.find(w)) out << " " << x;
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

std::vector<std::string> embedding_vocabulary(const MockSuite& suite) {
  // Reconstructed from the plan so the file order is stable.
  std::vector<std::string> words;
  std::set<std::string> seen;
  auto add = [&](std::string_view w) {
    std::string low = text::to_lower(w);
    if (suite.embeddings->find(low) && seen.insert(low).second) words.push_back(std::move(low));
  };
  for (const auto& cat : plan()) {
    for (const auto* records : {&cat.mutation, &cat.attack}) {
      for (const auto& r : *records) {
        for (const auto& in : r.inputs) {
          for (const auto& w : text::word_tokens(in)) add(w);
        }
        for (const auto& w : text::word_tokens(r.prompt)) add(w);
      }
    }
    for (const auto& in : cat.held_out) {
      for (const auto& w : text::word_tokens(in)) add(w);
    }
  }
  for (Task t : {Task::ads, Task::email, Task::recipe, Task::travel, Task::lyrics, Task::generic}) {
    for (const auto& w : text::word_tokens(mock::task_phrase(t))) add(w);
  }
  for (Feature f : mock::all_features()) {
    for (const auto& w : text::word_tokens(mock::directive_sentence(f))) add(w);
  }
  return words;
}

}  // namespace

MockSuite build_mock_suite(std::uint64_t seed) {
  MockSuite suite;
  suite.seed = seed;
  suite.backend.kind = BackendKind::mock;
  suite.backend.model_tag = "mock-a";
  suite.backend.mock_seed = seed;
  MockBackend service(suite.backend);

  auto make = [&](const std::string& category, const PlannedRecord& p) {
    PromptRecord r;
    r.id = p.id;
    r.category = Category(category);
    r.target_model_tag = suite.backend.model_tag;
    r.prompt_text = p.prompt;
    for (const auto& in : p.inputs) r.examples.push_back({in, service.complete(p.prompt, in, suite.backend.temperature)});
    return r;
  };

  std::vector<PromptRecord> mutation, attack;
  for (const auto& cat : plan()) {
    for (const auto& p : cat.mutation) mutation.push_back(make(cat.name, p));
    for (const auto& p : cat.attack) {
      attack.push_back(make(cat.name, p));
      if (p.unrecoverable) suite.unrecoverable.insert(p.id);
    }
    suite.held_out[cat.name] = cat.held_out;
  }
  suite.mutation = Dataset(std::move(mutation));
  suite.attack = Dataset(std::move(attack));
  suite.embeddings = build_embeddings();
  return suite;
}

void write_mock_suite(const MockSuite& suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "mutation.jsonl", serialize_dataset(suite.mutation));
  write_file_atomic(dir / "attack.jsonl", serialize_dataset(suite.attack));
  write_file_atomic(dir / "held_out.json", json(suite.held_out).dump(2) + "\n");
  save_embeddings(*suite.embeddings, embedding_vocabulary(suite), dir / "embeddings.txt");
  json meta{{"seed", suite.seed},
            {"backend", suite.backend},
            {"unrecoverable", std::vector<std::string>(suite.unrecoverable.begin(), suite.unrecoverable.end())}};
  write_file_atomic(dir / "suite.json", meta.dump(2) + "\n");
}

MockSuite load_mock_suite(const std::filesystem::path& dir) {
  auto read = [&](const std::string& name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw ConfigError("mock suite: cannot read " + (dir / name).string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  MockSuite suite;
  const json meta = json::parse(read("suite.json"));
  suite.seed = meta.at("seed").get<std::uint64_t>();
  meta.at("backend").get_to(suite.backend);
  for (const auto& id : meta.value("unrecoverable", std::vector<std::string>{})) suite.unrecoverable.insert(id);
  suite.mutation = parse_dataset(read("mutation.jsonl"), DatasetSchema::labeled);
  suite.attack = parse_dataset(read("attack.jsonl"), DatasetSchema::labeled);
  json::parse(read("held_out.json")).get_to(suite.held_out);
  suite.embeddings = std::make_shared<EmbeddingIndex>(EmbeddingIndex::load_text(dir / "embeddings.txt"));
  return suite;
}

Services mock_services(const MockSuite& suite) {
  Services s;
  auto backend = make_backend(suite.backend);
  s.target = backend;
  s.generator = backend;
  s.differ = backend;
  s.embeddings = suite.embeddings;
  s.held_out_inputs = suite.held_out;
  return s;
}

}  // namespace prsa
