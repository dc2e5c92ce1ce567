#include "prsa/syntax.hpp"

#include <cmath>
#include <map>

#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa {

std::size_t ParseNode::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::string ParseNode::to_string() const {
  if (is_leaf()) return label;
  std::string s = "(" + label;
  for (const auto& c : children) s += " " + c.to_string();
  return s + ")";
}

namespace {

struct BracketReader {
  std::string_view s;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  std::string atom() {
    const std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' &&
           s[pos] != ')') {
      ++pos;
    }
    if (start == pos) throw PreconditionError("bracketed tree: expected a label");
    return std::string(s.substr(start, pos - start));
  }
  ParseNode node() {
    skip();
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      skip();
      ParseNode n{atom(), {}};
      for (;;) {
        skip();
        if (pos >= s.size()) throw PreconditionError("bracketed tree: unbalanced parentheses");
        if (s[pos] == ')') {
          ++pos;
          break;
        }
        n.children.push_back(node());
      }
      return n;
    }
    return ParseNode{atom(), {}};
  }
};

bool is_noun(const std::string& t) { return is_noun_tag(t); }
bool is_det(const std::string& t) { return t == "DT" || t == "PRP$" || t == "CD" || t == "PDT"; }
bool is_adj(const std::string& t) { return t == "JJ" || t == "JJR" || t == "JJS"; }
bool is_verb(const std::string& t) { return t.size() >= 2 && t[0] == 'V' && t[1] == 'B'; }
bool is_adv(const std::string& t) { return t == "RB" || t == "RBR" || t == "RBS"; }

ParseNode chunk(std::string label, const std::vector<std::string>& tags, std::size_t b, std::size_t e) {
  ParseNode n{std::move(label), {}};
  for (std::size_t i = b; i < e; ++i) n.children.push_back(ParseNode{tags[i], {}});
  return n;
}

// Returns the end of an NP starting at i, or i when none starts there.
std::size_t match_np(const std::vector<std::string>& tags, std::size_t i) {
  if (i < tags.size() && (tags[i] == "PRP" || tags[i] == "EX")) return i + 1;
  std::size_t j = i;
  while (j < tags.size() && is_det(tags[j])) ++j;
  while (j < tags.size() && (is_adj(tags[j]) || tags[j] == "VBN" || tags[j] == "VBG") &&
         j + 1 < tags.size() && (is_adj(tags[j + 1]) || is_noun(tags[j + 1]) ||
                                 tags[j + 1] == "VBN" || tags[j + 1] == "VBG")) {
    ++j;
  }
  std::size_t k = j;
  while (k < tags.size() && is_noun(tags[k])) ++k;
  return k > j ? k : i;
}

std::size_t match_vp(const std::vector<std::string>& tags, std::size_t i) {
  std::size_t j = i;
  if (j < tags.size() && tags[j] == "MD") ++j;
  while (j < tags.size() && is_adv(tags[j]) && j + 1 < tags.size() && is_verb(tags[j + 1])) ++j;
  std::size_t k = j;
  while (k < tags.size() && is_verb(tags[k])) ++k;
  if (k == j) return i;
  if (k < tags.size() && tags[k] == "RP") ++k;
  return k;
}

using KernelKey = std::pair<const ParseNode*, const ParseNode*>;

std::string production(const ParseNode& n) {
  std::string p = n.label + " ->";
  for (const auto& c : n.children) p += " " + c.label;
  return p;
}

bool is_preterminal(const ParseNode& n) {
  if (n.is_leaf()) return false;
  for (const auto& c : n.children) {
    if (!c.is_leaf()) return false;
  }
  return true;
}

void collect_internal(const ParseNode& n, std::vector<const ParseNode*>& out) {
  if (n.is_leaf()) return;
  out.push_back(&n);
  for (const auto& c : n.children) collect_internal(c, out);
}

class KernelEvaluator {
 public:
  explicit KernelEvaluator(double decay) : decay_(decay) {}

  double delta(const ParseNode& a, const ParseNode& b) {
    if (a.is_leaf() || b.is_leaf()) return 0.0;
    const KernelKey key{&a, &b};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double value = 0.0;
    if (production_of(a) == production_of(b)) {
      if (is_preterminal(a)) {
        value = decay_;
      } else {
        value = decay_;
        for (std::size_t i = 0; i < a.children.size(); ++i) {
          value *= 1.0 + delta(a.children[i], b.children[i]);
        }
      }
    }
    memo_.emplace(key, value);
    return value;
  }

  double kernel(const ParseNode& a, const ParseNode& b) {
    std::vector<const ParseNode*> na, nb;
    collect_internal(a, na);
    collect_internal(b, nb);
    double sum = 0.0;
    for (const auto* x : na) {
      for (const auto* y : nb) sum += delta(*x, *y);
    }
    return sum;
  }

 private:
  const std::string& production_of(const ParseNode& n) {
    auto it = productions_.find(&n);
    if (it == productions_.end()) it = productions_.emplace(&n, production(n)).first;
    return it->second;
  }

  double decay_;
  std::map<KernelKey, double> memo_;
  std::map<const ParseNode*, std::string> productions_;
};

}  // namespace

ParseNode parse_bracketed(std::string_view s) {
  BracketReader r{s};
  ParseNode n = r.node();
  r.skip();
  if (r.pos != s.size()) throw PreconditionError("bracketed tree: trailing input");
  return n;
}

ShallowParser::ShallowParser(std::shared_ptr<const PosTagger> tagger) : tagger_(std::move(tagger)) {}

ParseNode ShallowParser::parse_sentence(const std::vector<std::string>& tags, bool* fallback) const {
  ParseNode root{"S", {}};
  bool any_phrase = false;
  std::size_t i = 0;
  while (i < tags.size()) {
    const std::string& t = tags[i];
    if ((t == "IN" || t == "TO") && i + 1 < tags.size()) {
      if (std::size_t e = match_np(tags, i + 1); e > i + 1) {
        ParseNode pp{"PP", {ParseNode{t, {}}, chunk("NP", tags, i + 1, e)}};
        root.children.push_back(std::move(pp));
        any_phrase = true;
        i = e;
        continue;
      }
      if (t == "TO") {
        if (std::size_t e = match_vp(tags, i + 1); e > i + 1) {
          root.children.push_back(chunk("VP", tags, i, e));
          any_phrase = true;
          i = e;
          continue;
        }
      }
    }
    if (std::size_t e = match_np(tags, i); e > i) {
      root.children.push_back(chunk("NP", tags, i, e));
      any_phrase = true;
      i = e;
      continue;
    }
    if (std::size_t e = match_vp(tags, i); e > i) {
      root.children.push_back(chunk("VP", tags, i, e));
      any_phrase = true;
      i = e;
      continue;
    }
    if (is_adj(t) || (is_adv(t) && i + 1 < tags.size() && is_adj(tags[i + 1]))) {
      std::size_t e = i;
      if (is_adv(tags[e])) ++e;
      while (e < tags.size() && is_adj(tags[e])) ++e;
      root.children.push_back(chunk("ADJP", tags, i, e));
      any_phrase = true;
      i = e;
      continue;
    }
    if (is_adv(t)) {
      std::size_t e = i;
      while (e < tags.size() && is_adv(tags[e])) ++e;
      root.children.push_back(chunk("ADVP", tags, i, e));
      any_phrase = true;
      i = e;
      continue;
    }
    root.children.push_back(ParseNode{t, {}});
    ++i;
  }
  if (!any_phrase) {
    if (fallback) *fallback = true;
    return chunk("S", tags, 0, tags.size());
  }
  return root;
}

ParsedDocument ShallowParser::parse(std::string_view text) const {
  ParsedDocument doc;
  for (const auto& sentence : text::split_sentences(text)) {
    const auto tokens = text::tokenize(sentence);
    if (tokens.empty()) continue;
    bool fb = false;
    doc.sentences.push_back(parse_sentence(tagger_->tag(tokens), &fb));
    doc.fallback = doc.fallback || fb;
  }
  return doc;
}

double tree_kernel(const ParseNode& a, const ParseNode& b, double decay) {
  KernelEvaluator ev(decay);
  return ev.kernel(a, b);
}

double normalized_tree_kernel(const ParseNode& a, const ParseNode& b, double decay) {
  KernelEvaluator ev(decay);
  const double ab = ev.kernel(a, b);
  const double aa = ev.kernel(a, a);
  const double bb = ev.kernel(b, b);
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

double document_similarity(const std::vector<ParseNode>& a, const std::vector<ParseNode>& b,
                           double decay) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;

  KernelEvaluator ev(decay);
  std::vector<double> self_a, self_b;
  for (const auto& t : a) self_a.push_back(ev.kernel(t, t));
  for (const auto& t : b) self_b.push_back(ev.kernel(t, t));

  std::vector<double> best_a(a.size(), 0.0), best_b(b.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double k = 0.0;
      if (self_a[i] > 0.0 && self_b[j] > 0.0) {
        k = ev.kernel(a[i], b[j]) / std::sqrt(self_a[i] * self_b[j]);
      }
      best_a[i] = std::max(best_a[i], k);
      best_b[j] = std::max(best_b[j], k);
    }
  }
  double sa = 0.0, sb = 0.0;
  for (double v : best_a) sa += v;
  for (double v : best_b) sb += v;
  return 0.5 * (sa / a.size() + sb / b.size());
}

SyntacticScore syntactic_similarity_detailed(std::string_view a, std::string_view b,
                                             const SyntaxProvider& syntax) {
  const auto da = syntax.parse(a);
  const auto db = syntax.parse(b);
  return {document_similarity(da.sentences, db.sentences), da.fallback || db.fallback};
}

double syntactic_similarity(std::string_view a, std::string_view b, const SyntaxProvider& syntax) {
  return syntactic_similarity_detailed(a, b, syntax).value;
}

const ShallowParser& default_syntax() {
  static const ShallowParser parser;
  return parser;
}

}  // namespace prsa
