#include <doctest.h>

#include <filesystem>

#include "gen.hpp"
#include "prsa/dataset.hpp"
#include "prsa/error.hpp"

using namespace prsa;

namespace {

PromptRecord make_record(std::string id, std::string category) {
  PromptRecord r;
  r.id = std::move(id);
  r.category = Category(category);
  r.target_model_tag = "mock-a";
  r.examples = {{"smartwatch", "Buy the smartwatch today."}, {"lamp", "Buy the lamp today."}};
  return r;
}

std::size_t error_line(std::string_view content, DatasetSchema schema = DatasetSchema::records) {
  try {
    parse_dataset(content, schema);
  } catch (const DatasetError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("category names are normalized") {
  CHECK(Category("  Ads ").name() == "ads");
  CHECK(Category("Ads") == Category("ads"));
  CHECK(Category("travel").is_known());
  CHECK_FALSE(Category("astrology").is_known());
  CHECK(known_categories().size() == 18);
}

TEST_CASE("dataset round trip") {
  Dataset ds({make_record("r1", "ads"), make_record("r2", "email")});
  auto with_prompt = make_record("r3", "ads");
  with_prompt.prompt_text = "Write an ad for {}.";
  ds = Dataset({make_record("r1", "ads"), make_record("r2", "email"), with_prompt});
  const Dataset back = parse_dataset(serialize_dataset(ds));
  CHECK(back == ds);
  CHECK(back.categories().size() == 2);
  CHECK(back.in_category(Category("ads")).size() == 2);
  REQUIRE(back.find("r3"));
  CHECK(back.find("r3")->prompt_text == "Write an ad for {}.");
  CHECK(back.find("nope") == nullptr);

  const auto path = std::filesystem::temp_directory_path() / "prsa_core_roundtrip.jsonl";
  save_dataset(ds, path);
  CHECK(load_dataset(path) == ds);
  std::filesystem::remove(path);
}

TEST_CASE("dataset round trip property") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PromptRecord> records;
    const int n = gen::uniform(rng, 1, 6);
    for (int i = 0; i < n; ++i) {
      PromptRecord r;
      r.id = "id" + std::to_string(i);
      r.category = Category(known_categories()[static_cast<std::size_t>(gen::uniform(rng, 0, 17))]);
      if (gen::uniform(rng, 0, 1)) r.prompt_text = gen::sentence(rng, 0, 8) + " \"quoted\"\n";
      const int k = gen::uniform(rng, 1, 4);
      for (int e = 0; e < k; ++e) r.examples.push_back({gen::sentence(rng, 0, 3), gen::sentence(rng, 1, 10)});
      records.push_back(std::move(r));
    }
    const Dataset ds(std::move(records));
    CHECK(parse_dataset(serialize_dataset(ds)) == ds);
  }
}

TEST_CASE("dataset errors carry line numbers") {
  const std::string good = R"({"id":"a","category":"ads","examples":[{"input":"x","output":"y"}]})";
  CHECK(error_line(good + "\n{not json\n") == 2);
  CHECK(error_line("\n\n[1,2]\n") == 3);
  CHECK(error_line(R"({"id":"a","category":"ads"})") == 1);                                     // no examples
  CHECK(error_line(R"({"id":"a","category":"ads","examples":[]})") == 1);                       // empty examples
  CHECK(error_line(R"({"id":"a","category":"ads","examples":[{"input":"x","output":"  "}]})") == 1);
  CHECK(error_line(R"({"id":"","category":"ads","examples":[{"input":"x","output":"y"}]})") == 1);
  CHECK(error_line(good + "\n" + good) == 2);                                                    // duplicate id
  CHECK(error_line(good, DatasetSchema::labeled) == 1);                                          // no prompt
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.jsonl"), DatasetError);
}

TEST_CASE("unknown categories load with a warning") {
  const auto ds = parse_dataset(R"({"id":"a","category":"Astrology","examples":[{"input":"x","output":"y"}]})");
  REQUIRE(ds.size() == 1);
  CHECK(ds.warnings().size() == 1);
  CHECK(ds.records()[0].category.name() == "astrology");
}

TEST_CASE("record validation") {
  auto r = make_record("x", "ads");
  CHECK(validate_record(r).empty());
  r.examples.clear();
  r.id.clear();
  CHECK(validate_record(r).size() == 2);
  CHECK_THROWS_AS(Dataset({make_record("d", "ads"), make_record("d", "email")}), DatasetError);
}

TEST_CASE("difference report validation") {
  DifferenceReport ok{{{"tone", "casual vs formal", 0.7}, {"style", "", 0.0}}};
  CHECK_NOTHROW(validate_report(ok));
  REQUIRE(ok.find("tone"));
  CHECK(ok.find("missing") == nullptr);
  CHECK_THROWS_AS(validate_report(DifferenceReport{{{"tone", "", 0.2}, {" Tone ", "", 0.3}}}), PreconditionError);
  CHECK_THROWS_AS(validate_report(DifferenceReport{{{"tone", "", 1.5}}}), PreconditionError);
  CHECK_THROWS_AS(validate_report(DifferenceReport{{{"", "", 0.5}}}), PreconditionError);
}

TEST_CASE("attention JSON and fingerprint") {
  Attention a;
  a.category = Category("ads");
  a.model_tag = "m";
  a.factors["tone"] = {"tone", "casual", 0.8};
  a.factors["style"] = {"style", "emoji", 0.5};
  a.samples_used = 3;
  a.iterations_per_sample = 2;
  a.id = attention_fingerprint(a);
  const Attention back = json(a).get<Attention>();
  CHECK(back == a);
  CHECK(attention_fingerprint(back) == a.id);

  Attention b = a;
  b.factors["tone"].loss = 0.9;
  CHECK(attention_fingerprint(b) != a.id);
  CHECK(normalize_factor_name("  Sentence   Formation ") == "sentence formation");
}
