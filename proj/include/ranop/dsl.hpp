#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ranop/common.hpp"
#include "ranop/env.hpp"

namespace ranop {

// RAN command language. Canonical rendering, one command per ";":
//
//   set_power(cell_1=-10dBm, cell_2=3dBm)
//   assign_rbs(user_1=[rb_1, rb_2], user_3=[rb_5])
//   set_scheduler_weights(flow_0=0.8, flow_1=0.2)
//   set_carrier(carrier_3, off)
//   noop()
//
// The parser also accepts the positional pair form "set_power(cell_1, -10dBm)"
// and the list form "set_scheduler(weights=[0.8, 0.2])", whose entries bind to
// flow_0, flow_1, ... in scenario flow order. Full grammar: docs/grammar.ebnf.

struct PowerSetting {
  std::string cell;
  double dbm = 0.0;
  bool operator==(const PowerSetting&) const = default;
};

struct RbGrant {
  std::string user;
  std::vector<std::string> rbs;
  bool operator==(const RbGrant&) const = default;
};

struct FlowWeight {
  std::string flow;
  double weight = 0.0;
  bool operator==(const FlowWeight&) const = default;
};

struct SetPower {
  std::vector<PowerSetting> settings;
  bool operator==(const SetPower&) const = default;
};

struct AssignRbs {
  std::vector<RbGrant> grants;
  bool operator==(const AssignRbs&) const = default;
};

struct SetSchedulerWeights {
  std::vector<FlowWeight> weights;
  bool operator==(const SetSchedulerWeights&) const = default;
};

struct SetCarrier {
  std::string carrier;
  bool on = true;
  bool operator==(const SetCarrier&) const = default;
};

struct Noop {
  bool operator==(const Noop&) const = default;
};

using Command = std::variant<SetPower, AssignRbs, SetSchedulerWeights, SetCarrier, Noop>;
using Program = std::vector<Command>;

inline constexpr std::size_t kMaxProgramBytes = 64 * 1024;

struct ParseError {
  std::size_t offset = 0;
  std::vector<std::string> expected;
  std::string message;

  std::string describe() const;
};

Expected<Program, ParseError> parse_program(std::string_view text);

std::string print_command(const Command& command);
std::string print_program(std::span<const Command> program);

// Head token of a command as printed.
const char* command_name(const Command& command);

bool is_valid_identifier(std::string_view id);

// Structural well-formedness required by print_program (non-empty lists,
// identifier charset, finite numbers).
bool is_well_formed(const Command& command);

// ---- framing ----------------------------------------------------------------

struct FramingError {
  std::string message;
};

// Text strictly between the first "<ACTION>" and the next "</ACTION>",
// trimmed of surrounding whitespace.
Expected<std::string, FramingError> extract_action(std::string_view text);

// ---- validation -------------------------------------------------------------

// Names and bounds that a command list is checked against. Built from the
// scenario and the current configuration.
struct ValidationScope {
  std::vector<std::string> cells;
  std::vector<std::string> users;
  std::vector<std::string> flows;
  std::vector<std::string> rbs;
  std::vector<std::string> carriers;

  std::vector<std::size_t> cell_carrier;
  std::vector<std::size_t> serving_cell;
  std::vector<double> current_powers_dbm;
  std::vector<bool> carrier_active;

  double p_min_w = 0.0;
  double p_max_cell_w = 0.0;
  double p_max_w = 0.0;
  double weight_tolerance = 1e-6;

  std::optional<std::size_t> cell_index(std::string_view id) const;
  std::optional<std::size_t> user_index(std::string_view id) const;
  // Exact flow name, or positional "flow_<i>" as produced by the list alias.
  std::optional<std::size_t> flow_index(std::string_view id) const;
  std::optional<std::size_t> rb_index(std::string_view id) const;
  std::optional<std::size_t> carrier_index(std::string_view id) const;
};

ValidationScope make_scope(const ScenarioConfig& scenario, const ConfigState& config);

enum class Rule {
  kAllowList,      // (a) command type allow-listed
  kUnknownId,      // (b) every id known to the scope
  kPowerBounds,    // (c) per-cell range and total budget
  kWeightSimplex,  // (d) weights in [0,1], sum 1 within tolerance
  kRbOverlap,      // (e) RB lists disjoint across users
  kDuplicateTarget // (f) no target assigned twice
};

const char* rule_code(Rule rule);  // "a" .. "f"
const char* rule_name(Rule rule);

struct Violation {
  Rule rule;
  std::string message;
  bool operator==(const Violation&) const = default;
};

struct Verdict {
  bool accepted = true;
  std::vector<Violation> reasons;

  bool cites(Rule rule) const;
  std::vector<std::string> describe() const;
};

Verdict validate(std::span<const Command> program, const ValidationScope& scope);

}  // namespace ranop
