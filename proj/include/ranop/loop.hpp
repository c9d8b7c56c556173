#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranop/adapter.hpp"
#include "ranop/env.hpp"
#include "ranop/intent.hpp"
#include "ranop/norm.hpp"
#include "ranop/policy.hpp"
#include "ranop/telemetry.hpp"

namespace ranop {

enum class GateMode { kAuto, kManual };
enum class Tier { kNearRt, kNonRt };

const char* tier_name(Tier tier);
std::optional<Tier> tier_from_name(std::string_view name);

struct LoopConfig {
  double tick_seconds = 0.0;          // > 0 overrides the scenario tick length
  std::uint64_t non_rt_period = 100;  // ticks between policy decisions
  std::uint64_t max_ticks = 1000;
  double eps_fp = 1e-8;
  std::uint64_t confirmation_periods = 3;
  bool stop_at_fixed_point = true;
  NormSpec norm;
  QuantizationSpec quantization;
  GateMode gate = GateMode::kAuto;
  std::uint64_t gate_timeout_periods = 5;  // unanswered proposals expire to reject
  std::size_t fault_budget = 10;           // policy exceptions tolerated per run
  std::size_t retain_records = 0;          // 0 keeps every record
  bool keep_states = false;                // retain full states alongside records

  std::uint64_t confirmation_window() const { return confirmation_periods * non_rt_period; }
  // Throws ConfigError.
  void check() const;
};

// One entry per tick. Record t holds s_t and what was issued on the
// transition into it (decided at boundary t-1 when tier is non-rt).
struct TrajectoryRecord {
  std::uint64_t tick = 0;
  std::string state_digest;
  std::string context_digest;
  std::string commands;  // canonical text issued on this transition, "" for none
  std::string proposed;  // canonical text the policy proposed
  std::vector<InterfaceMessage> messages;
  KpiVector kpis;
  double utility = 0.0;
  double residual = 0.0;
  Tier tier = Tier::kNearRt;
  std::string objective;
  std::vector<std::string> audit;
  std::vector<std::string> verdict;  // reasons when the guard rejected
  std::optional<std::string> decision_id;
};

struct FixedPoint {
  std::uint64_t tick = 0;
  std::string state_digest;
};

// First index i >= 1 with residuals[i .. i+window-1] all below eps.
std::optional<std::size_t> detect_fixed_point(std::span<const double> residuals, double eps, std::size_t window);
std::optional<FixedPoint> detect_fixed_point(std::span<const TrajectoryRecord> trajectory, double eps,
                                             std::size_t window);

// max over t of residual_{t+1} / residual_t where residual_t > 1e-12.
std::optional<double> residual_ratio(std::span<const TrajectoryRecord> trajectory);

class FaultBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GateStatus { kPending, kApproved, kRejected, kExpired, kIssued };
const char* gate_status_name(GateStatus status);

struct Proposal {
  std::string id;
  Program commands;
  std::string text;
  std::uint64_t proposed_tick = 0;
  GateStatus status = GateStatus::kPending;
};

enum class GateResult { kAccepted, kUnknown, kConflict };

// Single-threaded. The owner calls advance() once per tick; post_intent and
// resolve only stage changes that take effect at the next non-rt boundary.
class LoopEngine {
 public:
  LoopEngine(ScenarioConfig scenario, Intent intent, Policy& policy, LoopConfig config,
             std::optional<RanState> initial = std::nullopt);

  bool finished() const;
  const TrajectoryRecord& advance();

  void post_intent(Intent intent);
  GateResult resolve(const std::string& decision_id, bool approve);

  const ScenarioConfig& scenario() const { return scenario_; }
  const LoopConfig& config() const { return config_; }
  const RanState& state() const { return state_; }
  const StateContext& context() const { return context_; }
  const Intent& active_intent() const { return intent_; }
  const std::optional<Intent>& pending_intent() const { return next_intent_; }
  const std::deque<TrajectoryRecord>& records() const { return records_; }
  const std::deque<RanState>& states() const { return states_; }
  const std::map<std::string, Proposal>& proposals() const { return proposals_; }
  std::optional<FixedPoint> fixed_point() const { return fixed_point_; }
  std::size_t faults() const { return faults_; }
  std::string stop_reason() const;

 private:
  struct Decision {
    Program issued;
    std::string proposed;
    std::vector<std::string> audit;
    std::vector<std::string> verdict;
    std::optional<std::string> id;
  };
  Decision decide_at_boundary();
  Decision gate_step();
  TrajectoryRecord make_record(Tier tier) const;
  void push(TrajectoryRecord record);

  ScenarioConfig scenario_;
  Intent intent_;
  std::optional<Intent> next_intent_;
  Policy& policy_;
  LoopConfig config_;
  KpiNormalizer normalizer_;
  WeightVector weights_{};

  RanState state_;
  StateContext context_;
  std::deque<TrajectoryRecord> records_;
  std::deque<RanState> states_;
  std::map<std::string, Proposal> proposals_;
  std::optional<std::string> outstanding_;
  std::optional<FixedPoint> fixed_point_;
  std::uint64_t below_eps_ = 0;
  std::size_t faults_ = 0;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::vector<RanState> states;  // filled when LoopConfig::keep_states
  RanState final_state;
  std::optional<FixedPoint> fixed_point;
  std::string stop_reason;
  std::size_t faults = 0;
};

using RecordObserver = std::function<void(const TrajectoryRecord&)>;

// Throws FaultBudgetExceeded when policy exceptions exceed the budget.
RunResult run(const ScenarioConfig& scenario, const Intent& intent, Policy& policy, const LoopConfig& config,
              const RecordObserver& observer = {}, std::optional<RanState> initial = std::nullopt);

// F(s) = step(s, apply(compile(guard(decide(s))))); a rejected decision maps
// to the empty delta.
std::function<RanState(const RanState&)> closed_loop_map(Policy& policy, const Intent& intent,
                                                          const ScenarioConfig& scenario,
                                                          const QuantizationSpec& quantization = {});

}  // namespace ranop
