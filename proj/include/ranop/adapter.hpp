#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ranop/common.hpp"
#include "ranop/dsl.hpp"
#include "ranop/env.hpp"

namespace ranop {

// Policy-level directive for the near-RT scheduler (weights per flow).
struct A1PolicyMessage {
  std::string policy_id;
  std::vector<std::string> scope;  // cell ids
  std::vector<FlowWeight> weights;
  std::uint64_t issue_tick = 0;
  bool operator==(const A1PolicyMessage&) const = default;
};

enum class E2Parameter { kTxPowerDbm, kRbAssignment };

struct RbAssignment {
  std::string user;
  std::vector<std::string> rbs;
  bool operator==(const RbAssignment&) const = default;
};

struct E2ControlMessage {
  std::string target_cell;
  E2Parameter parameter = E2Parameter::kTxPowerDbm;
  std::variant<double, RbAssignment> value;
  std::uint64_t issue_tick = 0;
  bool operator==(const E2ControlMessage&) const = default;
};

struct O1ConfigMessage {
  std::string carrier;
  bool active = true;
  std::uint64_t issue_tick = 0;
  bool operator==(const O1ConfigMessage&) const = default;
};

using InterfaceMessage = std::variant<A1PolicyMessage, E2ControlMessage, O1ConfigMessage>;

// A command list that passed the validator against `scope`. Only guard() can
// create one, so compile() never sees unchecked input.
class GuardedCommands {
 public:
  const Program& commands() const { return commands_; }
  const ValidationScope& scope() const { return scope_; }

 private:
  GuardedCommands(Program commands, ValidationScope scope)
      : commands_(std::move(commands)), scope_(std::move(scope)) {}
  friend Expected<GuardedCommands, Verdict> guard(std::span<const Command>, const ValidationScope&);

  Program commands_;
  ValidationScope scope_;
};

Expected<GuardedCommands, Verdict> guard(std::span<const Command> commands, const ValidationScope& scope);

// SetSchedulerWeights -> A1, SetPower / AssignRbs -> E2, SetCarrier -> O1,
// Noop -> nothing. Message order follows command order.
std::vector<InterfaceMessage> compile(const GuardedCommands& commands, std::uint64_t tick);

// Folds messages into a single delta; later messages override earlier ones on
// the same target. A1 weights are renormalised onto the simplex and flows not
// named by the message get weight 0.
ConfigDelta apply(std::span<const InterfaceMessage> messages, const RanState& state,
                  const ScenarioConfig& scenario);

// Convenience path guard -> compile -> apply -> step. Throws ConfigError with
// the verdict reasons when the guard rejects.
RanState execute(const RanState& state, std::span<const Command> commands, const ScenarioConfig& scenario);

nlohmann::json message_to_json(const InterfaceMessage& message);

struct MessageBuckets {
  nlohmann::json a1 = nlohmann::json::array();
  nlohmann::json e2 = nlohmann::json::array();
  nlohmann::json o1 = nlohmann::json::array();
};
MessageBuckets bucket_messages(std::span<const InterfaceMessage> messages);

}  // namespace ranop
