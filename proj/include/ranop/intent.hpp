#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ranop/common.hpp"
#include "ranop/env.hpp"

namespace ranop {

// Reward weights over the KPI order [throughput, latency, energy].
using WeightVector = std::array<double, 3>;

enum class Objective { kMaximizeThroughput, kMinimizeLatency, kMinimizeEnergy, kCustomWeights };

const char* objective_name(Objective objective);
std::optional<Objective> objective_from_name(std::string_view name);

enum class Comparator { kAtMost, kAtLeast };

struct Constraint {
  Kpi metric = Kpi::kThroughput;
  Comparator comparator = Comparator::kAtLeast;
  double value = 0.0;   // canonical units: bit/s, s, W
  std::string units;    // as written in the document

  bool satisfied_by(const KpiVector& kpis) const;
  bool operator==(const Constraint&) const = default;
};

struct TimeWindow {
  std::uint64_t start_tick = 0;
  std::uint64_t end_tick = 0;  // exclusive

  bool contains(std::uint64_t tick) const { return tick >= start_tick && tick < end_tick; }
  bool operator==(const TimeWindow&) const = default;
};

struct IntentScope {
  std::vector<std::string> cells;  // empty: every cell
  std::optional<TimeWindow> window;
  bool operator==(const IntentScope&) const = default;
};

struct Intent {
  Objective objective = Objective::kMaximizeThroughput;
  std::optional<WeightVector> weights;  // set iff objective is custom_weights
  std::vector<Constraint> constraints;
  IntentScope scope;

  bool active_at(std::uint64_t tick) const { return !scope.window || scope.window->contains(tick); }
  bool operator==(const Intent&) const = default;
};

struct IntentError {
  std::string path;    // JSON pointer-like field path, e.g. "/constraints/0/metric"
  std::string reason;
};

// Default (alpha, beta, gamma) for minimize_latency, giving [alpha, -beta, gamma].
struct LatencyWeights {
  double alpha = 0.1;
  double beta = 1.0;
  double gamma = 0.1;

  // beta must dominate: beta >= 10 * max(alpha, gamma).
  bool dominant() const;
};

Expected<Intent, IntentError> parse_intent(std::string_view document);
Expected<Intent, IntentError> intent_from_json(const nlohmann::json& document);
nlohmann::json intent_to_json(const Intent& intent);

// Throws ConfigError when the latency defaults break the beta ordering.
WeightVector weights_for(const Intent& intent, const LatencyWeights& latency = {});

struct GoalPolicy {
  std::vector<std::string> objectives;
  std::vector<std::string> metrics;

  static GoalPolicy defaults();
};

bool permitted(const Intent& intent, const GoalPolicy& policy = GoalPolicy::defaults());

// Keyword-template matcher over a small canned phrase set. Sector names map to
// cell lists through `sectors`. Returns nullopt for anything unrecognised.
std::optional<Intent> match_phrase(std::string_view text,
                                   const std::map<std::string, std::vector<std::string>>& sectors = {},
                                   double tick_seconds = 0.01);

}  // namespace ranop
