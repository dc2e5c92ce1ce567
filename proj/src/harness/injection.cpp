#include <fstream>

#include "prsa/harness.hpp"
#include "prsa/text.hpp"

namespace prsa {

InjectionReport injection_baseline(Backend& service, std::string_view hidden_prompt,
                                   std::span<const std::string> probes) {
  if (probes.empty()) throw PreconditionError("injection baseline: no probes");
  const std::string needle = text::normalize(hidden_prompt);
  if (needle.empty()) throw PreconditionError("injection baseline: hidden prompt is empty");
  InjectionReport report;
  std::size_t hits = 0;
  for (const auto& probe : probes) {
    ProbeOutcome o;
    o.probe = probe;
    try {
      o.response = complete(service, "", probe);
      o.success = text::normalize(o.response).find(needle) != std::string::npos;
    } catch (const Error& e) {
      o.error = e.what();
    }
    hits += o.success ? 1 : 0;
    report.probes.push_back(std::move(o));
  }
  report.success_rate = static_cast<double>(hits) / static_cast<double>(probes.size());
  return report;
}

std::vector<std::string> load_probes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open probe file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    std::string probe;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
        probe += '\n';
        ++i;
      } else {
        probe += line[i];
      }
    }
    out.push_back(std::move(probe));
  }
  return out;
}

void to_json(json& j, const InjectionReport& r) {
  json probes = json::array();
  for (const auto& p : r.probes) {
    json e{{"probe", p.probe}, {"response", p.response}, {"success", p.success}};
    if (!p.error.empty()) e["error"] = p.error;
    probes.push_back(std::move(e));
  }
  j = json{{"probes", probes}, {"success_rate", r.success_rate}};
}

}  // namespace prsa
