#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "prsa/pos_tagger.hpp"

namespace prsa {

/// Constituency tree node. Leaves carry the POS tag (words are dropped, so
/// kernels compare syntax rather than lexical content).
struct ParseNode {
  std::string label;
  std::vector<ParseNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t node_count() const;
  /// Bracketed form, e.g. "(S (NP DT NN) (VP VBD))".
  std::string to_string() const;
};

/// Parses the bracketed form written by ParseNode::to_string.
ParseNode parse_bracketed(std::string_view s);

struct ParsedDocument {
  std::vector<ParseNode> sentences;
  bool fallback = false;  // at least one sentence was left as a flat POS sequence
};

/// Supplies one tree per sentence. Any constituency parser can be adapted.
class SyntaxProvider {
 public:
  virtual ~SyntaxProvider() = default;
  virtual ParsedDocument parse(std::string_view text) const = 0;
};

/// POS tags grouped by a fixed chunk grammar (NP, VP, PP, ADJP, ADVP) under
/// a sentence root.
class ShallowParser final : public SyntaxProvider {
 public:
  explicit ShallowParser(std::shared_ptr<const PosTagger> tagger = default_tagger());
  ParsedDocument parse(std::string_view text) const override;
  ParseNode parse_sentence(const std::vector<std::string>& tags, bool* fallback = nullptr) const;

 private:
  std::shared_ptr<const PosTagger> tagger_;
};

/// Subset-tree kernel: sum over node pairs of the decayed count of shared
/// fragments rooted at both nodes.
double tree_kernel(const ParseNode& a, const ParseNode& b, double decay = 1.0);

/// K(a,b) / sqrt(K(a,a) K(b,b)); 0 when either self-kernel is 0.
double normalized_tree_kernel(const ParseNode& a, const ParseNode& b, double decay = 1.0);

struct SyntacticScore {
  double value = 0.0;
  bool fallback = false;
};

/// Document similarity: each sentence is paired with its best match in the
/// other document, averaged per direction, then over both directions.
SyntacticScore syntactic_similarity_detailed(std::string_view a, std::string_view b,
                                             const SyntaxProvider& syntax);
double syntactic_similarity(std::string_view a, std::string_view b, const SyntaxProvider& syntax);

/// Pairwise-best averaging over already-parsed documents.
double document_similarity(const std::vector<ParseNode>& a, const std::vector<ParseNode>& b,
                           double decay = 1.0);

const ShallowParser& default_syntax();

}  // namespace prsa
