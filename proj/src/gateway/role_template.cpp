#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "prsa/error.hpp"
#include "prsa/gateway.hpp"
#include "prsa/text.hpp"

namespace prsa {

namespace {

constexpr const char* kAllSlots[] = {"input", "output", "attention", "output_a", "output_b"};

constexpr const char* kDefaultGenerator =
    R"(You are an expert prompt engineer. An AI assistant was configured with a hidden
instruction prompt. Given the input below, it produced the output below.

Input:
{input}

Output:
{output}

Write the instruction prompt that would make the assistant produce outputs with the
same purpose, content, tone, style and structure for any comparable input. Do not
copy details that only belong to this particular input.
{attention}
Reply with the prompt text only.
)";

constexpr const char* kDefaultDiffer =
    R"(Compare the two texts below regarding semantics, syntax and structure. Identify the
specific factors that cause them to differ. Consider factors such as theme, context,
tone, tense, style, sentence formation, structure and audience. Rate how strongly each
factor contributes to the difference with a loss between 0 (no difference) and 1
(completely different).

Text A:
{output_a}

Text B:
{output_b}

Answer with exactly one fenced block and nothing else. Write one factor per line as
`factor | description | loss`, for example:
```
tone | A is neutral while B is enthusiastic | 0.8
```
If the texts do not differ, return an empty fenced block.
)";

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

std::vector<std::string> RoleTemplate::required_slots(Role role) {
  switch (role) {
    case Role::generator:
      return {"input", "output", "attention"};
    case Role::differ:
      return {"output_a", "output_b"};
    case Role::target:
      break;
  }
  throw PreconditionError("role template: the target role has no template");
}

RoleTemplate::RoleTemplate(Role role, std::string text) : role_(role), text_(std::move(text)) {
  const auto required = required_slots(role);
  for (const char* slot : kAllSlots) {
    const std::string marker = std::string("{") + slot + "}";
    const std::size_t n = count_occurrences(text_, marker);
    const bool needed = std::find(required.begin(), required.end(), slot) != required.end();
    if (needed && n != 1) {
      throw ConfigError("role template: slot " + marker + " must appear exactly once (found " +
                        std::to_string(n) + ")");
    }
    if (!needed && n != 0) throw ConfigError("role template: slot " + marker + " is not valid for this role");
  }
}

RoleTemplate RoleTemplate::default_generator() { return RoleTemplate(Role::generator, kDefaultGenerator); }

RoleTemplate RoleTemplate::default_differ() { return RoleTemplate(Role::differ, kDefaultDiffer); }

RoleTemplate RoleTemplate::load(const std::filesystem::path& path, Role role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open role template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return RoleTemplate(role, ss.str());
}

std::string RoleTemplate::render(const std::vector<std::pair<std::string, std::string>>& values) const {
  std::map<std::string, std::string> lookup(values.begin(), values.end());
  std::string out;
  out.reserve(text_.size());
  std::size_t i = 0;
  while (i < text_.size()) {
    if (text_[i] == '{') {
      const std::size_t close = text_.find('}', i + 1);
      if (close != std::string::npos) {
        const std::string name = text_.substr(i + 1, close - i - 1);
        if (auto it = lookup.find(name); it != lookup.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text_[i++];
  }
  return out;
}

const std::vector<std::string>& difference_dimensions() {
  static const std::vector<std::string> dims = {"theme", "context",   "tone",      "tense",
                                                "style", "sentence formation", "structure", "audience"};
  return dims;
}

std::string render_attention(const Attention* attention) {
  if (!attention || attention->empty()) return "";
  std::string out = "Pay particular attention to these aspects of the output:\n";
  for (const auto& [name, f] : attention->factors) {
    out += "focus on: " + name;
    if (!f.description.empty()) out += " \xE2\x80\x94 " + f.description;
    out += "\n";
  }
  return out;
}

DifferenceReport parse_difference_block(std::string_view response) {
  const auto lines = text::split_lines(response);
  std::size_t open = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).rfind("```", 0) == 0) {
      open = i;
      break;
    }
  }
  if (open == lines.size()) throw AnalyzerFormatError("no fenced factor block in analyzer response");

  DifferenceReport report;
  std::map<std::string, std::size_t> index;
  bool closed = false;
  for (std::size_t i = open + 1; i < lines.size(); ++i) {
    const std::string line = text::trim(lines[i]);
    if (line.rfind("```", 0) == 0) {
      closed = true;
      break;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t p = line.find('|'); p != std::string::npos; p = line.find('|', start)) {
      fields.push_back(text::trim(std::string_view(line).substr(start, p - start)));
      start = p + 1;
    }
    fields.push_back(text::trim(std::string_view(line).substr(start)));
    if (fields.size() < 3) throw AnalyzerFormatError("malformed factor line: " + line);

    const std::string name = normalize_factor_name(fields.front());
    const std::string& loss_text = fields.back();
    if (name == "factor" && text::to_lower(loss_text) == "loss") continue;  // header row

    std::string description = fields[1];
    for (std::size_t k = 2; k + 1 < fields.size(); ++k) description += " | " + fields[k];

    double loss = 0.0;
    const char* first = loss_text.data();
    const char* last = first + loss_text.size();
    auto [ptr, ec] = std::from_chars(first, last, loss);
    if (ec != std::errc() || ptr != last || name.empty()) {
      throw AnalyzerFormatError("malformed factor line: " + line);
    }
    DifferenceFactor f{name, description, std::clamp(loss, 0.0, 1.0), loss < 0.0 || loss > 1.0};
    if (auto it = index.find(name); it != index.end()) {
      auto& existing = report.factors[it->second];
      if (f.loss > existing.loss) existing = f;
    } else {
      index.emplace(name, report.factors.size());
      report.factors.push_back(std::move(f));
    }
  }
  if (!closed) throw AnalyzerFormatError("unterminated fenced factor block");
  return report;
}

}  // namespace prsa
