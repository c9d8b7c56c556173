#include "ranop/intent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

namespace ranop {

using nlohmann::json;

const char* objective_name(Objective objective) {
  switch (objective) {
    case Objective::kMaximizeThroughput:
      return "maximize_throughput";
    case Objective::kMinimizeLatency:
      return "minimize_latency";
    case Objective::kMinimizeEnergy:
      return "minimize_energy";
    case Objective::kCustomWeights:
      return "custom_weights";
  }
  return "?";
}

std::optional<Objective> objective_from_name(std::string_view name) {
  for (auto o : {Objective::kMaximizeThroughput, Objective::kMinimizeLatency, Objective::kMinimizeEnergy,
                 Objective::kCustomWeights}) {
    if (name == objective_name(o)) return o;
  }
  return std::nullopt;
}

bool Constraint::satisfied_by(const KpiVector& kpis) const {
  const double v = kpis.get(metric);
  return comparator == Comparator::kAtMost ? v <= value : v >= value;
}

bool LatencyWeights::dominant() const {
  return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma) && beta > 0.0 &&
         beta >= 10.0 * std::max(std::abs(alpha), std::abs(gamma));
}

namespace {

std::optional<double> unit_scale(Kpi metric, std::string_view units) {
  if (units.empty()) return 1.0;
  switch (metric) {
    case Kpi::kThroughput:
      if (units == "bit/s" || units == "bps") return 1.0;
      if (units == "kbit/s" || units == "kbps") return 1e3;
      if (units == "Mbit/s" || units == "Mbps") return 1e6;
      break;
    case Kpi::kLatency:
      if (units == "s") return 1.0;
      if (units == "ms") return 1e-3;
      break;
    case Kpi::kEnergy:
      if (units == "W") return 1.0;
      if (units == "mW") return 1e-3;
      if (units == "kW") return 1e3;
      break;
  }
  return std::nullopt;
}

using Result = Expected<Intent, IntentError>;

Result fail(std::string path, std::string reason) { return unexpected(IntentError{std::move(path), std::move(reason)}); }

}  // namespace

Result intent_from_json(const json& doc) {
  if (!doc.is_object()) return fail("", "intent document must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "objective" && key != "weights" && key != "constraints" && key != "scope") {
      return fail("/" + key, "unknown field");
    }
  }

  Intent intent;
  const bool has_weights = doc.contains("weights");
  if (doc.contains("objective")) {
    if (!doc["objective"].is_string()) return fail("/objective", "objective must be a string");
    auto objective = objective_from_name(doc["objective"].get<std::string>());
    if (!objective) return fail("/objective", "'" + doc["objective"].get<std::string>() + "' is not a permissible goal");
    intent.objective = *objective;
  } else if (has_weights) {
    intent.objective = Objective::kCustomWeights;
  } else {
    return fail("/objective", "objective is required");
  }

  if (intent.objective == Objective::kCustomWeights) {
    if (!has_weights) return fail("/weights", "custom_weights requires an explicit weight vector");
    const auto& w = doc["weights"];
    if (!w.is_array() || w.size() != 3) return fail("/weights", "weights must be [throughput, latency, energy]");
    WeightVector v{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!w[i].is_number() || !std::isfinite(w[i].get<double>())) {
        return fail("/weights/" + std::to_string(i), "weight must be a finite number");
      }
      v[i] = w[i].get<double>();
    }
    if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) return fail("/weights", "weights must not all be zero");
    intent.weights = v;
  } else if (has_weights) {
    return fail("/weights", "weights are only allowed with objective custom_weights");
  }

  if (doc.contains("constraints")) {
    const auto& list = doc["constraints"];
    if (!list.is_array()) return fail("/constraints", "constraints must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string base = "/constraints/" + std::to_string(i);
      const auto& c = list[i];
      if (!c.is_object()) return fail(base, "constraint must be an object");
      if (!c.contains("metric") || !c["metric"].is_string()) return fail(base + "/metric", "metric is required");
      auto metric = kpi_from_name(c["metric"].get<std::string>());
      if (!metric) return fail(base + "/metric", "unknown metric '" + c["metric"].get<std::string>() + "'");
      if (!c.contains("comparator") || !c["comparator"].is_string()) {
        return fail(base + "/comparator", "comparator is required");
      }
      const auto cmp = c["comparator"].get<std::string>();
      Constraint out;
      out.metric = *metric;
      if (cmp == "<=" || cmp == "≤" || cmp == "at_most") {
        out.comparator = Comparator::kAtMost;
      } else if (cmp == ">=" || cmp == "≥" || cmp == "at_least") {
        out.comparator = Comparator::kAtLeast;
      } else {
        return fail(base + "/comparator", "comparator must be <= or >=");
      }
      if (!c.contains("value") || !c["value"].is_number() || !std::isfinite(c["value"].get<double>())) {
        return fail(base + "/value", "value must be a finite number");
      }
      if (c.contains("units") && !c["units"].is_string()) return fail(base + "/units", "units must be a string");
      out.units = c.value("units", std::string());
      auto scale = unit_scale(out.metric, out.units);
      if (!scale) return fail(base + "/units", "units '" + out.units + "' do not fit metric " + kpi_name(out.metric));
      out.value = c["value"].get<double>() * *scale;
      intent.constraints.push_back(std::move(out));
    }
  }

  if (doc.contains("scope")) {
    const auto& scope = doc["scope"];
    if (!scope.is_object()) return fail("/scope", "scope must be an object");
    if (scope.contains("cells")) {
      if (!scope["cells"].is_array()) return fail("/scope/cells", "cells must be an array of ids");
      for (std::size_t i = 0; i < scope["cells"].size(); ++i) {
        const auto& id = scope["cells"][i];
        if (!id.is_string()) return fail("/scope/cells/" + std::to_string(i), "cell id must be a string");
        intent.scope.cells.push_back(id.get<std::string>());
      }
    }
    if (scope.contains("window")) {
      const auto& w = scope["window"];
      if (!w.is_object() || !w.contains("start_tick") || !w.contains("end_tick") ||
          !w["start_tick"].is_number_unsigned() || !w["end_tick"].is_number_unsigned()) {
        return fail("/scope/window", "window needs unsigned start_tick and end_tick");
      }
      TimeWindow tw{w["start_tick"].get<std::uint64_t>(), w["end_tick"].get<std::uint64_t>()};
      if (tw.end_tick <= tw.start_tick) return fail("/scope/window", "end_tick must exceed start_tick");
      intent.scope.window = tw;
    }
  }
  return intent;
}

Result parse_intent(std::string_view document) {
  json doc = json::parse(document.begin(), document.end(), nullptr, false);
  if (doc.is_discarded()) return fail("", "intent document is not valid JSON");
  return intent_from_json(doc);
}

json intent_to_json(const Intent& intent) {
  json doc;
  doc["objective"] = objective_name(intent.objective);
  if (intent.weights) doc["weights"] = *intent.weights;
  if (!intent.constraints.empty()) {
    json list = json::array();
    for (const auto& c : intent.constraints) {
      list.push_back({{"metric", kpi_name(c.metric)},
                      {"comparator", c.comparator == Comparator::kAtMost ? "<=" : ">="},
                      {"value", c.value}});
    }
    doc["constraints"] = list;
  }
  if (!intent.scope.cells.empty() || intent.scope.window) {
    json scope = json::object();
    if (!intent.scope.cells.empty()) scope["cells"] = intent.scope.cells;
    if (intent.scope.window) {
      scope["window"] = {{"start_tick", intent.scope.window->start_tick},
                         {"end_tick", intent.scope.window->end_tick}};
    }
    doc["scope"] = scope;
  }
  return doc;
}

WeightVector weights_for(const Intent& intent, const LatencyWeights& latency) {
  switch (intent.objective) {
    case Objective::kMaximizeThroughput:
      return {1.0, 0.0, 0.0};
    case Objective::kMinimizeEnergy:
      return {0.0, 0.0, -1.0};
    case Objective::kMinimizeLatency:
      if (!latency.dominant()) throw ConfigError("latency weights must satisfy beta >= 10 * max(alpha, gamma)");
      return {latency.alpha, -latency.beta, latency.gamma};
    case Objective::kCustomWeights:
      if (!intent.weights) throw ConfigError("custom_weights intent without weights");
      return *intent.weights;
  }
  return {0.0, 0.0, 0.0};
}

GoalPolicy GoalPolicy::defaults() {
  return {{"maximize_throughput", "minimize_latency", "minimize_energy", "custom_weights"},
          {"throughput", "latency", "energy"}};
}

bool permitted(const Intent& intent, const GoalPolicy& policy) {
  auto listed = [](const std::vector<std::string>& list, std::string_view name) {
    return std::find(list.begin(), list.end(), name) != list.end();
  };
  if (!listed(policy.objectives, objective_name(intent.objective))) return false;
  if (intent.objective == Objective::kCustomWeights) {
    if (!intent.weights) return false;
    const auto& w = *intent.weights;
    if (!std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); })) return false;
    if (w[0] == 0.0 && w[1] == 0.0 && w[2] == 0.0) return false;
  }
  for (const auto& c : intent.constraints) {
    if (!listed(policy.metrics, kpi_name(c.metric))) return false;
  }
  return true;
}

namespace {

std::optional<double> clock_hours(const std::string& word) {
  if (word == "midnight") return 0.0;
  if (word == "noon" || word == "midday") return 12.0;
  static const std::regex kTime(R"((\d{1,2})\s*(am|pm))");
  std::smatch m;
  if (std::regex_match(word, m, kTime)) {
    int h = std::stoi(m[1]);
    if (h < 1 || h > 12) return std::nullopt;
    if (m[2] == "am") return h == 12 ? 0.0 : h;
    return h == 12 ? 12.0 : h + 12.0;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Intent> match_phrase(std::string_view text,
                                   const std::map<std::string, std::vector<std::string>>& sectors,
                                   double tick_seconds) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });

  Intent intent;
  auto has = [&](const char* word) { return s.find(word) != std::string::npos; };
  if (has("energy") || has("power consumption")) {
    intent.objective = Objective::kMinimizeEnergy;
  } else if (has("latency") || has("delay")) {
    intent.objective = Objective::kMinimizeLatency;
  } else if (has("throughput") || has("capacity")) {
    intent.objective = Objective::kMaximizeThroughput;
  } else {
    return std::nullopt;
  }

  static const std::regex kSector(R"(in the (\w+) sector)");
  std::smatch m;
  if (std::regex_search(s, m, kSector)) {
    if (auto it = sectors.find(m[1]); it != sectors.end()) intent.scope.cells = it->second;
  }

  static const std::regex kWindow(R"(between (midnight|noon|midday|\d{1,2}\s*(?:am|pm)) and (midnight|noon|midday|\d{1,2}\s*(?:am|pm)))");
  if (std::regex_search(s, m, kWindow)) {
    auto from = clock_hours(m[1]);
    auto to = clock_hours(m[2]);
    if (from && to) {
      double end = *to <= *from ? *to + 24.0 : *to;
      auto ticks = [&](double hours) { return static_cast<std::uint64_t>(std::llround(hours * 3600.0 / tick_seconds)); };
      intent.scope.window = TimeWindow{ticks(*from), ticks(end)};
    }
  }
  return intent;
}

}  // namespace ranop
