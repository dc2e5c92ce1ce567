#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <sstream>

#include "prsa/harness.hpp"

namespace prsa {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool CampaignReport::transport_failure_majority() const {
  std::size_t transport = 0;
  for (const auto& f : failures) transport += f.transport ? 1 : 0;
  const std::size_t total = results.size() + failures.size();
  return total > 0 && 2 * transport > total;
}

namespace {

void accumulate(SimilarityTriple& sum, const SimilarityTriple& t) {
  sum.semantic += t.semantic;
  sum.syntactic += t.syntactic;
  sum.structural += t.structural;
  sum.raw_semantic += t.raw_semantic;
  sum.raw_syntactic += t.raw_syntactic;
  sum.raw_structural += t.raw_structural;
  sum.syntax_fallback = sum.syntax_fallback || t.syntax_fallback;
}

void divide(SimilarityTriple& t, std::size_t n) {
  if (n == 0) return;
  const double d = static_cast<double>(n);
  t.semantic /= d;
  t.syntactic /= d;
  t.structural /= d;
  t.raw_semantic /= d;
  t.raw_syntactic /= d;
  t.raw_structural /= d;
}

}  // namespace

void aggregate(CampaignReport& report) {
  report.mean = {};
  report.per_category.clear();
  std::size_t successes = 0;
  std::map<std::string, std::size_t> category_successes;
  for (auto& r : report.results) {
    r.success = attack_success(r.similarity, report.thresholds);
    accumulate(report.mean, r.similarity);
    successes += r.success ? 1 : 0;
    auto& c = report.per_category[r.category.name()];
    ++c.records;
    accumulate(c.mean, r.similarity);
    category_successes[r.category.name()] += r.success ? 1 : 0;
  }
  divide(report.mean, report.results.size());
  report.asr = report.results.empty()
                   ? 0.0
                   : static_cast<double>(successes) / static_cast<double>(report.results.size());
  for (auto& [name, c] : report.per_category) {
    divide(c.mean, c.records);
    c.asr = static_cast<double>(category_successes[name]) / static_cast<double>(c.records);
  }
}

CampaignReport run_campaign(const Dataset& dataset, const AttackConfig& config, const Services& services, int jobs) {
  if (dataset.empty()) throw PreconditionError("campaign: empty dataset");
  config.validate();
  CampaignReport report;
  report.started_at = utc_timestamp();
  report.thresholds = config.thresholds;
  report.config = config;

  const auto& records = dataset.records();
  std::vector<std::optional<AttackResult>> results(records.size());
  std::vector<std::optional<RecordFailure>> failures(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        results[i] = run_attack(records[i], config, services);
      } catch (const AttackError& e) {
        failures[i] = RecordFailure{records[i].id, e.stage(), e.what(), e.transport()};
      } catch (const Error& e) {
        failures[i] = RecordFailure{records[i].id, "setup", e.what(), false};
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(records.size()));
  std::vector<std::future<void>> pool;
  for (int w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (results[i]) report.results.push_back(std::move(*results[i]));
    if (failures[i]) report.failures.push_back(std::move(*failures[i]));
  }
  aggregate(report);
  report.finished_at = utc_timestamp();
  if (!config.report_path.empty()) write_report(report, config.report_path);
  return report;
}

void to_json(json& j, const CampaignReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back(
        {{"record_id", f.record_id}, {"stage", f.stage}, {"message", f.message}, {"transport", f.transport}});
  }
  json categories = json::object();
  for (const auto& [name, c] : r.per_category) {
    categories[name] = {{"records", c.records}, {"mean", c.mean}, {"asr", c.asr}};
  }
  j = json{{"started_at", r.started_at},
           {"finished_at", r.finished_at},
           {"config", r.config},
           {"thresholds", r.thresholds},
           {"results", r.results},
           {"failures", failures},
           {"mean", r.mean},
           {"asr", r.asr},
           {"per_category", categories}};
}

std::string summary_table(const CampaignReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %7s %9s %9s %11s %6s\n", "category", "records", "semantic", "syntactic",
                "structural", "ASR");
  out << line;
  for (const auto& [name, c] : report.per_category) {
    std::snprintf(line, sizeof line, "%-14s %7zu %9.3f %9.3f %11.3f %6.2f\n", name.c_str(), c.records,
                  c.mean.semantic, c.mean.syntactic, c.mean.structural, c.asr);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-14s %7zu %9.3f %9.3f %11.3f %6.2f\n", "all", report.results.size(),
                report.mean.semantic, report.mean.syntactic, report.mean.structural, report.asr);
  out << line;
  if (!report.failures.empty()) out << report.failures.size() << " record(s) failed\n";
  return out.str();
}

void write_report(const CampaignReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, json(report).dump(2) + "\n");
  auto table = path;
  table.replace_extension(".txt");
  write_file_atomic(table, summary_table(report));
}

}  // namespace prsa
