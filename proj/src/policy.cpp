#include "ranop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ranop/adapter.hpp"

namespace ranop {

KpiNormalizer KpiNormalizer::for_scenario(const ScenarioConfig& scenario, double latency_scale) {
  KpiNormalizer n;
  double rate = 0.0;
  for (std::size_t k = 0; k < scenario.users; ++k) {
    const double g = scenario.gains[k * scenario.cells + scenario.serving_cell[k]];
    rate += scenario.bandwidth_hz[k] * std::log2(1.0 + scenario.p_max_cell_w * g / scenario.noise_w);
  }
  n.throughput = rate > 0.0 ? rate : 1.0;
  n.latency = latency_scale > 0.0 ? latency_scale : 1.0;
  const double energy = scenario.p_max_w + scenario.static_carrier_w * static_cast<double>(scenario.carriers());
  n.energy = energy > 0.0 ? energy : 1.0;
  return n;
}

double utility(const KpiVector& kpis, const WeightVector& w, const KpiNormalizer& norm) {
  return w[0] * (kpis.throughput / norm.throughput) + w[1] * (kpis.latency / norm.latency) +
         w[2] * (kpis.energy / norm.energy);
}

double utility(const RanState& state, const ScenarioConfig& scenario, const WeightVector& w,
               const KpiNormalizer& norm) {
  return utility(compute_kpis(state, scenario), w, norm);
}

double reward(const RanState& state, std::span<const Command> action, const WeightVector& w,
              const ScenarioConfig& scenario, const KpiNormalizer& norm) {
  const RanState next = execute(state, action, scenario);
  return utility(next, scenario, w, norm) - utility(state, scenario, w, norm);
}

CandidateGrid CandidateGrid::for_scenario(const ScenarioConfig& scenario, int levels, double span_db) {
  CandidateGrid grid;
  const double top = watts_to_dbm(scenario.p_max_cell_w);
  const double bottom = scenario.p_min_w > 0.0 ? watts_to_dbm(scenario.p_min_w) : -1e300;
  std::vector<double> list;
  for (int i = 0; i < std::max(levels, 1); ++i) {
    const double step = levels > 1 ? span_db * i / (levels - 1) : 0.0;
    const double dbm = std::max(top - step, bottom);
    if (list.empty() || list.back() != dbm) list.push_back(dbm);
  }
  grid.power_levels_dbm.assign(scenario.cells, list);
  return grid;
}

namespace {

void weight_points(std::size_t flows, int units, double step, std::vector<int>& parts, std::size_t at,
                   std::vector<std::vector<double>>& out) {
  if (at + 1 == flows) {
    parts[at] = units;
    std::vector<double> w(flows);
    for (std::size_t f = 0; f < flows; ++f) w[f] = parts[f] * step;
    out.push_back(std::move(w));
    return;
  }
  for (int u = units; u >= 0; --u) {
    parts[at] = u;
    weight_points(flows, units - u, step, parts, at + 1, out);
  }
}

bool is_noop(const Program& p) {
  return std::all_of(p.begin(), p.end(), [](const Command& c) { return std::holds_alternative<Noop>(c); });
}

}  // namespace

std::vector<Program> enumerate_candidates(const CandidateGrid& grid, const RanState& state,
                                          const ScenarioConfig& scenario) {
  const std::size_t cap = std::max<std::size_t>(grid.max_candidates, 1);
  std::vector<Program> out{Program{Noop{}}};
  auto full = [&] { return out.size() >= cap; };

  std::vector<std::size_t> varied;
  for (std::size_t m = 0; m < std::min(grid.power_levels_dbm.size(), scenario.cells); ++m) {
    if (!grid.power_levels_dbm[m].empty()) varied.push_back(m);
  }
  if (!varied.empty()) {
    std::vector<std::size_t> idx(varied.size(), 0);
    bool wrapped = false;
    while (!wrapped && !full()) {
      SetPower cmd;
      for (std::size_t i = 0; i < varied.size(); ++i) {
        cmd.settings.push_back({scenario.cell_ids[varied[i]], grid.power_levels_dbm[varied[i]][idx[i]]});
      }
      out.push_back(Program{std::move(cmd)});
      std::size_t i = varied.size();
      while (true) {
        if (i == 0) {
          wrapped = true;
          break;
        }
        --i;
        if (++idx[i] < grid.power_levels_dbm[varied[i]].size()) break;
        idx[i] = 0;
      }
    }
  }

  if (grid.weight_step > 0.0 && grid.weight_step <= 1.0 && scenario.flows >= 1 && !full()) {
    const int units = static_cast<int>(std::llround(1.0 / grid.weight_step));
    const double step = 1.0 / units;
    std::vector<std::vector<double>> points;
    std::vector<int> parts(scenario.flows, 0);
    weight_points(scenario.flows, units, step, parts, 0, points);
    for (const auto& point : points) {
      if (full()) break;
      SetSchedulerWeights cmd;
      for (std::size_t f = 0; f < scenario.flows; ++f) cmd.weights.push_back({scenario.flow_ids[f], point[f]});
      out.push_back(Program{std::move(cmd)});
    }
  }

  if (grid.carrier_toggles) {
    for (std::size_t c = 0; c < scenario.carriers() && !full(); ++c) {
      out.push_back(Program{SetCarrier{scenario.carrier_ids[c], !state.config.carrier_active[c]}});
    }
  }
  return out;
}

GreedyChoice greedy_decide(const Intent& intent, const RanState& state, const CandidateGrid& grid,
                           const ScenarioConfig& scenario, const KpiNormalizer& norm,
                           const LatencyWeights& latency) {
  const WeightVector w = weights_for(intent, latency);
  const ValidationScope scope = make_scope(scenario, state.config);

  CandidateGrid scoped = grid;
  if (!intent.scope.cells.empty()) {
    for (std::size_t m = 0; m < scoped.power_levels_dbm.size() && m < scenario.cells; ++m) {
      if (std::find(intent.scope.cells.begin(), intent.scope.cells.end(), scenario.cell_ids[m]) ==
          intent.scope.cells.end()) {
        scoped.power_levels_dbm[m].clear();
      }
    }
  }

  std::optional<GreedyChoice> best;
  std::string best_text;
  std::size_t admissible = 0;
  for (auto& candidate : enumerate_candidates(scoped, state, scenario)) {
    auto guarded = guard(candidate, scope);
    if (!guarded) continue;
    const RanState next = step(state, apply(compile(*guarded, state.tick), state, scenario), scenario);
    const KpiVector kpis = compute_kpis(next, scenario);
    if (!is_noop(candidate) &&
        !std::all_of(intent.constraints.begin(), intent.constraints.end(),
                     [&](const Constraint& c) { return c.satisfied_by(kpis); })) {
      continue;
    }
    const double u = utility(kpis, w, norm);
    bool take = !best || u > best->utility;
    if (best && u == best->utility) {
      if (kpis.energy < best->kpis.energy) {
        take = true;
      } else if (kpis.energy == best->kpis.energy) {
        std::string text = print_program(candidate);
        if (best_text.empty()) best_text = print_program(best->action);
        take = text < best_text;
      }
    }
    ++admissible;
    if (take) {
      best = GreedyChoice{std::move(candidate), u, kpis, 0};
      best_text.clear();
    }
  }

  if (!best) {
    // Only reachable when the current configuration itself breaks the budget.
    const RanState next = step(state, ConfigDelta{}, scenario);
    const KpiVector kpis = compute_kpis(next, scenario);
    return GreedyChoice{Program{Noop{}}, utility(kpis, w, norm), kpis, 0};
  }
  best->evaluated = admissible;
  return *best;
}

LinearPolicyParams LinearPolicyParams::diagonal(std::size_t cells, double g, double target_w) {
  LinearPolicyParams p;
  p.gain.assign(cells * cells, 0.0);
  for (std::size_t m = 0; m < cells; ++m) p.gain[m * cells + m] = g;
  p.target_w.assign(cells, target_w);
  return p;
}

Program linear_decide(const LinearPolicyParams& params, const RanState& state, const ScenarioConfig& scenario) {
  const std::size_t n = scenario.cells;
  if (params.gain.size() != n * n || params.target_w.size() != n) {
    throw ConfigError("linear policy gain must be cells x cells and target must have one entry per cell");
  }
  std::vector<double> p(n), next(n);
  for (std::size_t m = 0; m < n; ++m) p[m] = state.config.power_w(m);
  const double lo = std::max(scenario.p_min_w, params.floor_w);
  for (std::size_t m = 0; m < n; ++m) {
    double v = p[m];
    for (std::size_t j = 0; j < n; ++j) v += params.gain[m * n + j] * (params.target_w[j] - p[j]);
    next[m] = std::clamp(v, lo, scenario.p_max_cell_w);
  }
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (scenario.cell_active(state.config, m)) total += next[m];
  }
  if (total > scenario.p_max_w) {
    for (double& v : next) v = std::max(v * scenario.p_max_w / total, lo);
  }
  SetPower cmd;
  for (std::size_t m = 0; m < n; ++m) cmd.settings.push_back({scenario.cell_ids[m], watts_to_dbm(next[m])});
  return Program{std::move(cmd)};
}

namespace {

void require_accepted(const Program& program, const DecisionInput& in, const char* who) {
  const Verdict v = validate(program, make_scope(in.scenario, in.state.config));
  if (!v.accepted) {
    std::string reasons;
    for (const auto& r : v.describe()) reasons += (reasons.empty() ? "" : "; ") + r;
    throw std::logic_error(std::string(who) + " policy produced a rejected command list: " + reasons);
  }
}

}  // namespace

Program GreedyPolicy::decide(const DecisionInput& in) {
  const CandidateGrid grid = grid_ ? *grid_ : CandidateGrid::for_scenario(in.scenario);
  auto choice = greedy_decide(in.intent, in.state, grid, in.scenario,
                              KpiNormalizer::for_scenario(in.scenario, latency_scale_), latency_);
  require_accepted(choice.action, in, "greedy");
  return std::move(choice.action);
}

Program LinearPolicy::decide(const DecisionInput& in) {
  Program program = linear_decide(params_, in.state, in.scenario);
  if (!validate(program, make_scope(in.scenario, in.state.config)).accepted) program = Program{Noop{}};
  require_accepted(program, in, "linear");
  return program;
}

}  // namespace ranop
