#include "ranop/adapter.hpp"

#include <numeric>

namespace ranop {

using nlohmann::json;

Expected<GuardedCommands, Verdict> guard(std::span<const Command> commands, const ValidationScope& scope) {
  Verdict verdict = validate(commands, scope);
  if (!verdict.accepted) return unexpected(std::move(verdict));
  return GuardedCommands(Program(commands.begin(), commands.end()), scope);
}

std::vector<InterfaceMessage> compile(const GuardedCommands& guarded, std::uint64_t tick) {
  const auto& scope = guarded.scope();
  std::vector<InterfaceMessage> out;
  std::size_t a1_seq = 0;
  for (const Command& command : guarded.commands()) {
    if (const auto* p = std::get_if<SetPower>(&command)) {
      for (const auto& s : p->settings) {
        out.push_back(E2ControlMessage{s.cell, E2Parameter::kTxPowerDbm, s.dbm, tick});
      }
    } else if (const auto* r = std::get_if<AssignRbs>(&command)) {
      for (const auto& g : r->grants) {
        const auto user = scope.user_index(g.user);
        std::string cell = user && *user < scope.serving_cell.size() ? scope.cells[scope.serving_cell[*user]] : "";
        out.push_back(E2ControlMessage{cell, E2Parameter::kRbAssignment, RbAssignment{g.user, g.rbs}, tick});
      }
    } else if (const auto* w = std::get_if<SetSchedulerWeights>(&command)) {
      out.push_back(A1PolicyMessage{"a1-" + std::to_string(tick) + "-" + std::to_string(a1_seq++), scope.cells,
                                    w->weights, tick});
    } else if (const auto* c = std::get_if<SetCarrier>(&command)) {
      out.push_back(O1ConfigMessage{c->carrier, c->on, tick});
    }
  }
  return out;
}

namespace {

std::size_t require(std::optional<std::size_t> index, const std::string& what, const std::string& id) {
  if (!index) throw ConfigError("message references unknown " + what + " '" + id + "'");
  return *index;
}

}  // namespace

ConfigDelta apply(std::span<const InterfaceMessage> messages, const RanState& state,
                  const ScenarioConfig& scenario) {
  const ValidationScope ids = make_scope(scenario, state.config);
  ConfigDelta delta;
  for (const auto& message : messages) {
    if (const auto* a1 = std::get_if<A1PolicyMessage>(&message)) {
      std::vector<double> weights(scenario.flows, 0.0);
      for (const auto& w : a1->weights) weights[require(ids.flow_index(w.flow), "flow", w.flow)] = w.weight;
      const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (sum > 0.0) {
        for (double& w : weights) w /= sum;
      }
      delta.scheduler_weights = std::move(weights);
    } else if (const auto* e2 = std::get_if<E2ControlMessage>(&message)) {
      if (e2->parameter == E2Parameter::kTxPowerDbm) {
        delta.power_dbm[require(ids.cell_index(e2->target_cell), "cell", e2->target_cell)] =
            std::get<double>(e2->value);
      } else {
        const auto& grant = std::get<RbAssignment>(e2->value);
        std::vector<std::size_t> rbs;
        for (const auto& rb : grant.rbs) rbs.push_back(require(ids.rb_index(rb), "rb", rb));
        delta.rb_grants[require(ids.user_index(grant.user), "user", grant.user)] = std::move(rbs);
      }
    } else if (const auto* o1 = std::get_if<O1ConfigMessage>(&message)) {
      delta.carrier_active[require(ids.carrier_index(o1->carrier), "carrier", o1->carrier)] = o1->active;
    }
  }
  return delta;
}

RanState execute(const RanState& state, std::span<const Command> commands, const ScenarioConfig& scenario) {
  auto guarded = guard(commands, make_scope(scenario, state.config));
  if (!guarded) {
    std::string reasons;
    for (const auto& r : guarded.error().describe()) reasons += (reasons.empty() ? "" : "; ") + r;
    throw ConfigError("command list rejected: " + reasons);
  }
  const auto messages = compile(*guarded, state.tick);
  return step(state, apply(messages, state, scenario), scenario);
}

json message_to_json(const InterfaceMessage& message) {
  if (const auto* a1 = std::get_if<A1PolicyMessage>(&message)) {
    json weights = json::object();
    json order = json::array();
    for (const auto& w : a1->weights) {
      weights[w.flow] = w.weight;
      order.push_back(w.flow);
    }
    return {{"policy_id", a1->policy_id}, {"scope", a1->scope}, {"weights", weights}, {"flow_order", order},
            {"issue_tick", a1->issue_tick}};
  }
  if (const auto* e2 = std::get_if<E2ControlMessage>(&message)) {
    json out = {{"target_cell", e2->target_cell}, {"issue_tick", e2->issue_tick}};
    if (e2->parameter == E2Parameter::kTxPowerDbm) {
      out["parameter"] = "tx_power_dbm";
      out["value"] = std::get<double>(e2->value);
    } else {
      const auto& g = std::get<RbAssignment>(e2->value);
      out["parameter"] = "rb_assignment";
      out["value"] = {{"user", g.user}, {"rbs", g.rbs}};
    }
    return out;
  }
  const auto& o1 = std::get<O1ConfigMessage>(message);
  return {{"carrier", o1.carrier}, {"active", o1.active}, {"issue_tick", o1.issue_tick}};
}

MessageBuckets bucket_messages(std::span<const InterfaceMessage> messages) {
  MessageBuckets b;
  for (const auto& m : messages) {
    auto j = message_to_json(m);
    if (std::holds_alternative<A1PolicyMessage>(m)) {
      b.a1.push_back(std::move(j));
    } else if (std::holds_alternative<E2ControlMessage>(m)) {
      b.e2.push_back(std::move(j));
    } else {
      b.o1.push_back(std::move(j));
    }
  }
  return b;
}

}  // namespace ranop
