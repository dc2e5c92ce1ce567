#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "prsa/dataset.hpp"
#include "prsa/embedding.hpp"
#include "prsa/gateway.hpp"
#include "prsa/harness.hpp"

namespace prsa {

/// Synthetic campaign for the mock LLM: a mutation set for learning
/// attention, an attack set with planted directives, held-out inputs and a
/// small embedding index.
struct MockSuite {
  std::uint64_t seed = 7;
  BackendConfig backend;
  Dataset mutation;  // 3 records per category
  Dataset attack;    // 4 records per category
  std::map<std::string, std::vector<std::string>> held_out;
  std::shared_ptr<const EmbeddingIndex> embeddings;
  std::set<std::string> unrecoverable;  // attack records whose directives the mutation set never shows
};

MockSuite build_mock_suite(std::uint64_t seed = 7);

/// mutation.jsonl, attack.jsonl, held_out.json, embeddings.txt, suite.json
void write_mock_suite(const MockSuite& suite, const std::filesystem::path& dir);
MockSuite load_mock_suite(const std::filesystem::path& dir);

/// One mock backend serving all three roles, plus the suite's embeddings
/// and held-out inputs. Attention is left unset.
Services mock_services(const MockSuite& suite);

}  // namespace prsa
