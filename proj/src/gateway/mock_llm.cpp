#include "prsa/mock_llm.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <unordered_set>

#include "prsa/error.hpp"
#include "prsa/text.hpp"

namespace prsa::mock {

namespace {

struct FeatureInfo {
  Feature feature;
  std::string_view name;
  std::string_view dimension;
  std::string_view key;  // substring of a factor name that attends the feature
  std::string_view sentence;
  std::vector<std::string_view> cues;  // prompt words that switch it on
};

const std::vector<FeatureInfo>& feature_table() {
  static const std::vector<FeatureInfo> table = {
      {Feature::emoji, "emoji", "style", "emoji", "Include emojis.", {"emoji", "emojis"}},
      {Feature::tags, "tags", "style", "tag", "End with hashtags.", {"hashtag", "hashtags", "tags"}},
      {Feature::headings, "headings", "structure", "heading", "Organize it with section headings.",
       {"heading", "headings", "sections"}},
      {Feature::colloquial, "colloquial", "tone", "colloquial", "Use a casual, colloquial tone.",
       {"colloquial", "casual"}},
      {Feature::formal, "formal", "tone", "formal", "Use a formal tone.", {"formal"}},
      {Feature::audience, "audience", "audience", "audience", "State the target audience.", {"audience"}},
      {Feature::bullets, "bullets", "structure", "bullet", "Add bullet points.", {"bullet", "bullets"}},
      {Feature::title, "title", "structure", "title", "Start with a title.", {"title"}},
      {Feature::short_length, "short", "sentence formation", "length", "Keep it short.",
       {"short", "brief", "concise"}},
      {Feature::long_length, "long", "sentence formation", "length", "Make it detailed and long.",
       {"detailed", "long", "lengthy"}},
  };
  return table;
}

const FeatureInfo& info(Feature f) {
  for (const auto& i : feature_table()) {
    if (i.feature == f) return i;
  }
  throw PreconditionError("mock: unknown feature");
}

struct TaskInfo {
  Task task;
  std::string_view name;
  std::string_view phrase;
  std::vector<std::string_view> cues;
  std::array<std::string_view, 4> cores;  // "{S}" marks the subject
  std::string_view title_suffix;
  std::string_view audience;
  std::string_view tag;
};

const std::vector<TaskInfo>& task_table() {
  static const std::vector<TaskInfo> table = {
      {Task::ads, "ads", "an advertising copy", {"advertising", "advertisement", "ad"},
       {"{S} fits neatly into every busy daily routine", "Every detail of {S} is built to last for years",
        "Shoppers can grab {S} today at a launch price", "Reviewers rate {S} among the smartest buys this year"},
       "Spotlight", "busy shoppers", "deal"},
      {Task::email, "email", "an email", {"email", "e-mail", "newsletter"},
       {"I am writing to you regarding {S} and our next steps",
        "Please find the details about {S} attached to this message",
        "Kindly reply by Friday so we can confirm {S} together",
        "Our team remains available for any questions about {S}"},
       "Update", "business partners", "inbox"},
      {Task::recipe, "recipe", "a recipe", {"recipe", "recipes"},
       {"Prepare the ingredients for {S} and preheat the oven",
        "Cook {S} slowly over medium heat while stirring often",
        "Season {S} with salt, pepper and fresh herbs to taste", "Serve {S} warm with a side salad for four people"},
       "Kitchen Notes", "home cooks", "homecooking"},
      {Task::travel, "travel", "a travel guide", {"guide", "itinerary", "travel"},
       {"Start your trip to {S} with a walk through the old town",
        "Local markets around {S} offer street food and crafts",
        "Book lodging near {S} early during the peak months", "Trains and buses connect {S} with nearby villages"},
       "Travel Notes", "curious travelers", "wanderlust"},
      {Task::lyrics, "lyrics", "song lyrics", {"lyrics", "song"},
       {"Verse one rises softly where {S} meets the night", "Chorus sings that {S} will carry us along",
        "Verse two remembers {S} in a fading melody", "Bridge returns to {S} before the final chorus"},
       "Ballad", "late night listeners", "newmusic"},
      {Task::generic, "generic", "a text", {},
       {"This text is about {S}", "It describes {S} in plain words", "It gives some background on {S}",
        "It closes with a summary of {S}"},
       "Notes", "general readers", "info"},
  };
  return table;
}

const TaskInfo& info(Task t) {
  for (const auto& i : task_table()) {
    if (i.task == t) return i;
  }
  throw PreconditionError("mock: unknown task");
}

constexpr std::array<std::string_view, 4> kColloquialLead = {"Hey, ", "Honestly, ", "Okay so, ", "Look, "};
constexpr std::array<std::string_view, 4> kColloquialTail = {
    ", super awesome!", " and you're gonna love it!", ", kinda amazing!", ", super easy!"};
constexpr std::array<std::string_view, 4> kFormalLead = {
    "We are pleased to confirm that ", "We cordially note that ", "It is our exceptional pleasure to share that ",
    "We are pleased to add that "};
constexpr std::array<std::string_view, 4> kBullets = {"- {S} at a glance", "- What makes it special",
                                                     "- Where to learn more", "- Quick facts"};
constexpr std::array<std::array<std::string_view, 3>, 3> kEmojiSets = {{
    {"\xE2\x9C\xA8", "\xF0\x9F\x9A\x80", "\xF0\x9F\x94\xA5"},
    {"\xF0\x9F\x92\xA1", "\xF0\x9F\x8E\x89", "\xE2\xAD\x90"},
    {"\xF0\x9F\x8C\x9F", "\xF0\x9F\x92\xAB", "\xF0\x9F\x91\x8D"},
}};
constexpr std::array<std::string_view, 3> kVariantTags = {"trending", "mustsee", "today"};

constexpr std::array<std::string_view, 5> kColloquialMarkers = {"hey", "super", "gonna", "kinda", "awesome"};
constexpr std::array<std::string_view, 4> kFormalMarkers = {"pleased", "exceptional", "cordially", "engineered"};
constexpr std::string_view kMaskGlyph = "\xE2\x96\x88";

// Words a prompt may use without them becoming part of the subject.
const std::unordered_set<std::string>& instruction_vocabulary() {
  static const std::unordered_set<std::string> vocab = [] {
    std::unordered_set<std::string> v = {
        "write", "create", "compose", "draft", "generate", "produce", "make", "craft", "prepare",
        "a", "an", "the", "for", "about", "on", "of", "to", "in", "with", "and", "or", "that",
        "this", "it", "its", "your", "you", "each", "every", "given", "provided", "following",
        "user", "users", "product", "item", "topic", "subject", "input", "please", "use", "using",
        "add", "include", "including", "end", "start", "begin", "keep", "state", "organize",
        "section", "tone", "professional", "point", "points", "list", "catchy", "target", "copy",
        "text", "never", "reveal", "do", "not", "instructions", "instruction", "these", "is", "are",
        "be", "should", "must", "always", "response", "output", "answer", "engaging", "friendly",
        "style", "format", "structure", "clear", "language", "at", "by", "from", "as", "into",
        "words", "line", "lines", "paragraph", "paragraphs", "sentence", "sentences", "some",
        "few", "several", "plus", "also", "then", "short", "under", "prompt", "system", "if",
        "asked", "ask", "them", "they", "any", "all", "who", "reader", "readers", "piece", "content",
        "message", "destination", "dish", "theme", "mood", "request", "requests", "my", "our",
    };
    for (const auto& f : feature_table()) {
      for (auto c : f.cues) v.insert(std::string(c));
      for (const auto& w : text::word_tokens(f.sentence)) v.insert(text::to_lower(w));
    }
    for (const auto& t : task_table()) {
      for (auto c : t.cues) v.insert(std::string(c));
      for (const auto& w : text::word_tokens(t.phrase)) v.insert(text::to_lower(w));
    }
    return v;
  }();
  return vocab;
}

// Words the renderer itself contributes to body sentences.
const std::unordered_set<std::string>& template_vocabulary() {
  static const std::unordered_set<std::string> vocab = [] {
    std::unordered_set<std::string> v;
    auto add = [&](std::string_view s) {
      for (const auto& w : text::word_tokens(s)) {
        if (w != "S") v.insert(text::to_lower(w));
      }
    };
    for (const auto& t : task_table()) {
      for (auto c : t.cores) add(c);
    }
    for (auto s : kColloquialLead) add(s);
    for (auto s : kColloquialTail) add(s);
    for (auto s : kFormalLead) add(s);
    return v;
  }();
  return vocab;
}

// Body words unique to one task's sentences.
const std::map<Task, std::unordered_set<std::string>>& task_signatures() {
  static const std::map<Task, std::unordered_set<std::string>> sigs = [] {
    std::map<std::string, std::set<Task>> owners;
    for (const auto& t : task_table()) {
      for (auto c : t.cores) {
        for (const auto& w : text::word_tokens(c)) {
          if (w != "S") owners[text::to_lower(w)].insert(t.task);
        }
      }
    }
    std::map<Task, std::unordered_set<std::string>> out;
    for (const auto& [w, tasks] : owners) {
      if (tasks.size() == 1) out[*tasks.begin()].insert(w);
    }
    return out;
  }();
  return sigs;
}

std::string replace_subject(std::string_view pattern, std::string_view subject) {
  std::string out(pattern);
  for (std::size_t p = out.find("{S}"); p != std::string::npos; p = out.find("{S}", p + subject.size())) {
    out.replace(p, 3, subject);
  }
  return out;
}

std::string lower_first(std::string s) {
  if (s.size() > 1 && std::isupper(static_cast<unsigned char>(s[0])) && s[1] != ' ') {
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  }
  return s;
}

std::string title_case(std::string_view s) {
  std::string out(s);
  bool start = true;
  for (auto& c : out) {
    if (start && std::islower(static_cast<unsigned char>(c))) c = static_cast<char>(std::toupper(c));
    start = c == ' ';
  }
  return out;
}

std::string tag_of(std::string_view subject) {
  std::string out;
  for (char c : subject) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(c));
  }
  return out.empty() ? "topic" : out;
}

bool line_starts(std::string_view line, std::string_view prefix) { return line.substr(0, prefix.size()) == prefix; }

bool is_tag_token(std::string_view tok) {
  return tok.size() > 1 && tok[0] == '#' && std::isalnum(static_cast<unsigned char>(tok[1]));
}

bool is_emoji(std::string_view tok) { return text::is_symbol(tok) && tok.substr(0, kMaskGlyph.size()) != kMaskGlyph; }

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const std::vector<Feature>& all_features() {
  static const std::vector<Feature> fs = [] {
    std::vector<Feature> v;
    for (const auto& i : feature_table()) v.push_back(i.feature);
    return v;
  }();
  return fs;
}

std::string_view feature_name(Feature f) { return info(f).name; }

std::optional<Feature> feature_from_name(std::string_view name) {
  for (const auto& i : feature_table()) {
    if (i.name == name) return i.feature;
  }
  return std::nullopt;
}

std::string_view directive_sentence(Feature f) { return info(f).sentence; }
std::string_view task_name(Task t) { return info(t).name; }
std::string_view task_phrase(Task t) { return info(t).phrase; }

PromptReading read_prompt(std::string_view prompt) {
  PromptReading r;
  const auto tokens = text::tokenize(prompt);
  const auto& vocab = instruction_vocabulary();
  bool task_found = false;
  std::string prev;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok == "{" && i + 1 < tokens.size() && tokens[i + 1] == "}") {
      if (r.subject.empty() || r.subject.back() != "{}") r.subject.emplace_back("{}");
      ++i;
      prev.clear();
      continue;
    }
    if (tok == "[") {
      std::size_t j = i + 1;
      while (j < tokens.size() && tokens[j] != "]") ++j;
      if (j < tokens.size()) {
        if (r.subject.empty() || r.subject.back() != "{}") r.subject.emplace_back("{}");
        i = j;
        prev.clear();
        continue;
      }
    }
    if (!text::is_word(tok)) continue;
    const std::string low = text::to_lower(tok);
    if (!task_found) {
      for (const auto& t : task_table()) {
        if (std::find(t.cues.begin(), t.cues.end(), low) != t.cues.end()) {
          r.task = t.task;
          task_found = true;
          break;
        }
      }
    }
    for (const auto& f : feature_table()) {
      if (std::find(f.cues.begin(), f.cues.end(), low) != f.cues.end()) r.features.insert(f.feature);
    }
    if ((prev == "never" && (low == "reveal" || low == "do"))) r.protective = true;
    prev = low;
    if (!vocab.contains(low)) r.subject.push_back(tok);
  }
  // Conflicting length cues: the longer request wins.
  if (r.features.contains(Feature::short_length) && r.features.contains(Feature::long_length)) {
    r.features.erase(Feature::short_length);
  }
  return r;
}

std::string resolve_subject(const PromptReading& reading, std::string_view input) {
  const std::string in = text::collapse_whitespace(text::trim(input));
  std::vector<std::string> parts;
  for (const auto& w : reading.subject) {
    if (w == "{}") {
      if (!in.empty()) parts.push_back(in);
    } else {
      parts.push_back(w);
    }
  }
  std::string s = text::join(parts, " ");
  if (s.empty()) s = in;
  return s.empty() ? "this topic" : s;
}

Observation observe(std::string_view output) {
  Observation o;
  std::map<Task, std::size_t> votes;
  const auto& sigs = task_signatures();
  const auto& tmpl = template_vocabulary();
  for (const auto& raw : text::split_lines(output)) {
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    if (line_starts(line, "Title:")) {
      o.features.insert(Feature::title);
    } else if (line_starts(line, "Audience:")) {
      o.features.insert(Feature::audience);
    } else if (line_starts(line, "## ")) {
      o.features.insert(Feature::headings);
    } else if (line_starts(line, "- ")) {
      o.features.insert(Feature::bullets);
    }
    bool body_line = !line_starts(line, "Title:") && !line_starts(line, "Audience:") && !line_starts(line, "#") &&
                     !line_starts(line, "- ");
    for (const auto& tok : text::whitespace_spans(line)) {
      if (is_tag_token(std::string_view(line).substr(tok.begin, tok.end - tok.begin))) {
        o.features.insert(Feature::tags);
        body_line = false;
      }
    }
    const auto tokens = text::tokenize(line);
    for (const auto& tok : tokens) {
      if (is_emoji(tok)) o.features.insert(Feature::emoji);
      const std::string low = text::to_lower(tok);
      if (std::find(kColloquialMarkers.begin(), kColloquialMarkers.end(), low) != kColloquialMarkers.end()) {
        o.features.insert(Feature::colloquial);
      }
      if (std::find(kFormalMarkers.begin(), kFormalMarkers.end(), low) != kFormalMarkers.end()) {
        o.features.insert(Feature::formal);
      }
    }
    const char last = line.back();
    if (!body_line || (last != '.' && last != '!' && last != '?')) continue;
    ++o.body_sentences;
    for (const auto& tok : tokens) {
      if (!text::is_word(tok)) continue;
      const std::string low = text::to_lower(tok);
      for (const auto& [task, words] : sigs) {
        if (words.contains(low)) ++votes[task];
      }
      if (!tmpl.contains(low)) o.subject_words.insert(low);
    }
  }
  if (o.body_sentences == 1) o.features.insert(Feature::short_length);
  if (o.body_sentences >= 4) o.features.insert(Feature::long_length);
  std::size_t best = 0;
  for (const auto& [task, n] : votes) {
    if (n > best) {
      best = n;
      o.task = task;
    }
  }
  return o;
}

bool is_leak_probe(std::string_view input) {
  const std::string s = text::normalize(input);
  for (std::string_view cue : {"prompt", "initialization", "instructions", "words above"}) {
    if (s.find(cue) != std::string::npos) return true;
  }
  return false;
}

std::string compose_prompt(Task task, const FeatureSet& features, std::string_view subject) {
  std::string out = "Write " + std::string(task_phrase(task)) + " for " + std::string(subject) + ".";
  for (const auto& f : feature_table()) {
    if (features.contains(f.feature)) out += " " + std::string(f.sentence);
  }
  return out;
}

bool factor_attends(std::string_view factor_name, Feature f) {
  const auto& i = info(f);
  const std::string name = normalize_factor_name(factor_name);
  return name == i.dimension || name.find(i.key) != std::string::npos;
}

}  // namespace prsa::mock

namespace prsa {

using namespace mock;

MockBackend::MockBackend(BackendConfig config) : Backend(std::move(config)) {
  if (config_.kind != BackendKind::mock) throw ConfigError("MockBackend needs a mock config");
  if (!config_.mock_seed) throw ConfigError("mock backend: a directive-universe seed is required");
}

std::uint64_t MockBackend::variant(Task task) const {
  std::uint64_t h = fnv1a(config_.model_tag);
  h = fnv1a(std::to_string(*config_.mock_seed), h);
  return fnv1a(task_name(task), h);
}

std::string MockBackend::render(Task task, const FeatureSet& features, std::string_view subject) const {
  const auto& t = info(task);
  const std::uint64_t v = variant(task);
  std::vector<std::string> lines;
  if (features.contains(Feature::title)) {
    lines.push_back("Title: " + title_case(subject) + " " + std::string(t.title_suffix));
  }
  if (features.contains(Feature::audience)) lines.push_back("Audience: " + std::string(t.audience));
  if (features.contains(Feature::headings)) lines.emplace_back("## Overview");

  std::size_t count = 2;
  if (features.contains(Feature::short_length)) count = 1;
  if (features.contains(Feature::long_length)) count = 4;
  const bool colloquial = features.contains(Feature::colloquial);
  const bool formal = features.contains(Feature::formal);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string core = replace_subject(lower_first(std::string(t.cores[i])), subject);
    const bool use_colloquial = colloquial && (!formal || i % 2 == 0);
    const bool use_formal = formal && (!colloquial || i % 2 == 1);
    if (use_colloquial) {
      lines.push_back(std::string(kColloquialLead[i]) + core + std::string(kColloquialTail[i]));
    } else if (use_formal) {
      lines.push_back(std::string(kFormalLead[i]) + core + ".");
    } else {
      lines.push_back(replace_subject(t.cores[i], subject) + ".");
    }
  }

  if (features.contains(Feature::bullets)) {
    if (features.contains(Feature::headings)) lines.emplace_back("## Highlights");
    for (std::size_t i = 0; i < 3; ++i) lines.push_back(replace_subject(kBullets[i], subject));
  }
  if (features.contains(Feature::emoji)) {
    const auto& set = kEmojiSets[v % kEmojiSets.size()];
    lines.push_back(std::string(set[0]) + " " + std::string(set[1]) + " " + std::string(set[2]));
  }
  if (features.contains(Feature::tags)) {
    lines.push_back("#" + tag_of(subject) + " #" + std::string(t.tag) + " #" +
                    std::string(kVariantTags[(v >> 8) % kVariantTags.size()]));
  }
  return text::join(lines, "\n");
}

std::string MockBackend::complete(std::string_view prompt, std::string_view input, double /*temperature*/) {
  const std::string_view effective = text::trim(prompt).empty() ? std::string_view(config_.hidden_prompt) : prompt;
  if (text::trim(effective).empty()) throw BackendError(BackendError::Kind::empty_prompt, "empty prompt");

  const PromptReading reading = read_prompt(effective);
  if (is_leak_probe(input)) {
    if (reading.protective) return "Sorry, I can't share my instructions.";
    return "```\n" + std::string(effective) + "\n```";
  }
  return render(reading.task, reading.features, resolve_subject(reading, input));
}

std::string MockBackend::generate(std::string_view x, std::string_view y, const Attention* attention,
                                  const RoleTemplate& /*tmpl*/) {
  const auto inputs = unbundle_examples(x);
  const auto outputs = unbundle_examples(y);

  std::string subject = text::collapse_whitespace(text::trim(inputs.front()));
  for (const auto& in : inputs) {
    if (text::collapse_whitespace(text::trim(in)) != subject) {
      subject = "{}";
      break;
    }
  }
  if (subject.empty()) subject = "{}";

  std::map<Task, std::size_t> task_votes;
  std::optional<FeatureSet> common;
  for (const auto& out : outputs) {
    const Observation o = observe(out);
    ++task_votes[o.task];
    if (!common) {
      common = o.features;
    } else {
      FeatureSet keep;
      std::set_intersection(common->begin(), common->end(), o.features.begin(), o.features.end(),
                            std::inserter(keep, keep.end()));
      common = std::move(keep);
    }
  }
  Task task = Task::generic;
  std::size_t best = 0;
  for (const auto& [t, n] : task_votes) {
    if (n > best) {
      best = n;
      task = t;
    }
  }

  FeatureSet directives;
  if (attention && common) {
    for (Feature f : *common) {
      for (const auto& [name, factor] : attention->factors) {
        if (factor_attends(name, f)) {
          directives.insert(f);
          break;
        }
      }
    }
  }
  return compose_prompt(task, directives, subject);
}

DifferenceReport MockBackend::analyze(std::string_view y_surrogate, std::string_view y_target,
                                      const RoleTemplate& /*tmpl*/) {
  const Observation a = observe(y_surrogate);
  const Observation b = observe(y_target);
  DifferenceReport report;
  auto presence = [&](std::string name, Feature f, std::string_view what) {
    const bool in_a = a.features.contains(f);
    const bool in_b = b.features.contains(f);
    std::string desc;
    if (in_a == in_b) {
      desc = std::string(in_a ? "both texts use " : "neither text uses ") + std::string(what);
    } else {
      desc = std::string(in_b ? "only text B uses " : "only text A uses ") + std::string(what);
    }
    report.factors.push_back({std::move(name), std::move(desc), in_a == in_b ? 0.0 : 1.0, false});
  };
  presence("style/emoji", Feature::emoji, "emojis");
  presence("style/tags", Feature::tags, "hashtags");
  presence("structure/headings", Feature::headings, "section headings");
  presence("structure/bullets", Feature::bullets, "bullet points");
  presence("structure/title", Feature::title, "a title line");
  presence("tone/colloquial", Feature::colloquial, "a colloquial tone");
  presence("tone/formal", Feature::formal, "a formal tone");
  presence("context/audience", Feature::audience, "an audience line");

  auto length_class = [](const Observation& o) {
    if (o.features.contains(Feature::short_length)) return std::string("short");
    if (o.features.contains(Feature::long_length)) return std::string("long");
    return std::string("medium");
  };
  const std::string la = length_class(a), lb = length_class(b);
  report.factors.push_back({"sentence formation/length",
                            la == lb ? "both texts are " + la : "text A is " + la + " while text B is " + lb,
                            la == lb ? 0.0 : 1.0, false});
  report.factors.push_back({"context/task",
                            a.task == b.task ? "same kind of text"
                                             : "text A reads as " + std::string(task_name(a.task)) +
                                                   " while text B reads as " + std::string(task_name(b.task)),
                            a.task == b.task ? 0.0 : 1.0, false});

  std::size_t shared = 0;
  for (const auto& w : a.subject_words) shared += b.subject_words.contains(w) ? 1 : 0;
  const std::size_t uni = a.subject_words.size() + b.subject_words.size() - shared;
  const double theme_loss = uni == 0 ? 0.0 : 1.0 - static_cast<double>(shared) / static_cast<double>(uni);
  report.factors.push_back({"theme/subject", theme_loss == 0.0 ? "same subject" : "the texts discuss different subjects",
                            theme_loss, false});
  return report;
}

}  // namespace prsa
