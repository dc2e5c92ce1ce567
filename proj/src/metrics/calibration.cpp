#include <cmath>
#include <future>
#include <tuple>

#include "prsa/error.hpp"
#include "prsa/metrics.hpp"

namespace prsa {

namespace {

struct Candidate {
  std::size_t correct = 0;
  std::size_t sem = 0;
  std::size_t syn = 0;
  std::size_t str = 0;

  // Better accuracy first, then the tie-break preference for higher thresholds.
  bool operator<(const Candidate& o) const {
    return std::tie(correct, sem, syn, str) < std::tie(o.correct, o.sem, o.syn, o.str);
  }
};

}  // namespace

Calibration calibrate_thresholds(std::span<const LabeledTriple> labeled, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) {
    throw PreconditionError("calibrate_thresholds: grid step must lie in (0, 1]");
  }
  std::size_t positives = 0;
  for (const auto& l : labeled) {
    if (l.label != 0 && l.label != 1) throw PreconditionError("calibrate_thresholds: labels must be 0 or 1");
    positives += l.label == 1 ? 1 : 0;
  }
  if (positives == 0 || positives == labeled.size()) {
    throw PreconditionError("calibrate_thresholds: need samples of both labels");
  }

  // Grid points k/K when the step divides 1 evenly, k*step otherwise.
  const double inv = 1.0 / grid_step;
  const bool even = std::abs(inv - std::round(inv)) < 1e-9;
  const std::size_t steps = even ? static_cast<std::size_t>(std::llround(inv))
                                 : static_cast<std::size_t>(std::floor(inv + 1e-9));
  std::vector<double> grid;
  for (std::size_t k = 0; k <= steps; ++k) {
    grid.push_back(even ? static_cast<double>(k) / static_cast<double>(steps)
                        : static_cast<double>(k) * grid_step);
  }

  auto slice = [&](std::size_t sem) {
    Candidate best{0, sem, 0, 0};
    bool have = false;
    for (std::size_t syn = 0; syn < grid.size(); ++syn) {
      for (std::size_t str = 0; str < grid.size(); ++str) {
        const Thresholds t{grid[sem], grid[syn], grid[str]};
        Candidate c{0, sem, syn, str};
        for (const auto& l : labeled) {
          const bool predicted = attack_success(l.triple, t);
          c.correct += (predicted == (l.label == 1)) ? 1 : 0;
        }
        if (!have || best < c) {
          best = c;
          have = true;
        }
      }
    }
    return best;
  };

  std::vector<std::future<Candidate>> jobs;
  jobs.reserve(grid.size());
  for (std::size_t sem = 0; sem < grid.size(); ++sem) {
    jobs.push_back(std::async(std::launch::async, slice, sem));
  }
  Candidate best{};
  bool have = false;
  for (auto& j : jobs) {
    const Candidate c = j.get();
    if (!have || best < c) {
      best = c;
      have = true;
    }
  }

  Calibration out;
  out.thresholds = {grid[best.sem], grid[best.syn], grid[best.str]};
  out.accuracy = static_cast<double>(best.correct) / static_cast<double>(labeled.size());
  return out;
}

void to_json(json& j, const LabeledTriple& t) {
  j = json{{"semantic", t.triple.semantic},
           {"syntactic", t.triple.syntactic},
           {"structural", t.triple.structural},
           {"label", t.label}};
}

void from_json(const json& j, LabeledTriple& t) {
  t.triple.semantic = j.at("semantic").get<double>();
  t.triple.syntactic = j.at("syntactic").get<double>();
  t.triple.structural = j.at("structural").get<double>();
  t.triple.raw_semantic = t.triple.semantic;
  t.triple.raw_syntactic = t.triple.syntactic;
  t.triple.raw_structural = t.triple.structural;
  t.label = j.at("label").get<int>();
}

}  // namespace prsa
