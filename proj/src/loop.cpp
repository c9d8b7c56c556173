#include "ranop/loop.hpp"

#include <algorithm>
#include <cmath>

namespace ranop {

const char* tier_name(Tier tier) { return tier == Tier::kNonRt ? "non-rt" : "near-rt"; }

std::optional<Tier> tier_from_name(std::string_view name) {
  if (name == "non-rt") return Tier::kNonRt;
  if (name == "near-rt") return Tier::kNearRt;
  return std::nullopt;
}

const char* gate_status_name(GateStatus status) {
  switch (status) {
    case GateStatus::kPending:
      return "pending";
    case GateStatus::kApproved:
      return "approved";
    case GateStatus::kRejected:
      return "rejected";
    case GateStatus::kExpired:
      return "expired";
    case GateStatus::kIssued:
      return "issued";
  }
  return "?";
}

void LoopConfig::check() const {
  if (non_rt_period < 1) throw ConfigError("non-rt period must be at least 1 tick");
  if (!(eps_fp > 0.0)) throw ConfigError("fixed-point tolerance must be positive");
  if (confirmation_periods < 1) throw ConfigError("confirmation window must span at least one period");
  if (!norm.valid()) throw ConfigError("norm weights must be non-negative and scales positive");
  if (!quantization.valid()) throw ConfigError("quantization spec is invalid");
  if (tick_seconds < 0.0 || !std::isfinite(tick_seconds)) throw ConfigError("tick length must be non-negative");
  if (gate_timeout_periods < 1) throw ConfigError("gate timeout must be at least one period");
}

std::optional<std::size_t> detect_fixed_point(std::span<const double> residuals, double eps, std::size_t window) {
  window = std::max<std::size_t>(window, 1);
  std::size_t run = 0;
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    run = residuals[i] < eps ? run + 1 : 0;
    if (run == window) return i + 1 - window;
  }
  return std::nullopt;
}

std::optional<FixedPoint> detect_fixed_point(std::span<const TrajectoryRecord> trajectory, double eps,
                                             std::size_t window) {
  std::vector<double> residuals;
  residuals.reserve(trajectory.size());
  for (const auto& r : trajectory) residuals.push_back(r.residual);
  auto i = detect_fixed_point(residuals, eps, window);
  if (!i) return std::nullopt;
  return FixedPoint{trajectory[*i].tick, trajectory[*i].state_digest};
}

std::optional<double> residual_ratio(std::span<const TrajectoryRecord> trajectory) {
  std::optional<double> best;
  for (std::size_t i = 2; i < trajectory.size(); ++i) {
    const double prev = trajectory[i - 1].residual;
    if (prev > 1e-12) {
      const double ratio = trajectory[i].residual / prev;
      if (!best || ratio > *best) best = ratio;
    }
  }
  return best;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

const Program kNoop{Noop{}};

}  // namespace

LoopEngine::LoopEngine(ScenarioConfig scenario, Intent intent, Policy& policy, LoopConfig config,
                       std::optional<RanState> initial)
    : scenario_(std::move(scenario)), intent_(std::move(intent)), policy_(policy), config_(std::move(config)) {
  config_.check();
  if (config_.tick_seconds > 0.0) scenario_.tick_seconds = config_.tick_seconds;
  normalizer_ = KpiNormalizer::for_scenario(scenario_);
  weights_ = weights_for(intent_);
  state_ = initial ? std::move(*initial) : initial_state(scenario_);
  if (auto bad = check_invariants(state_, scenario_); !bad.empty()) {
    throw ScenarioError("initial state invalid: " + bad.front());
  }
  context_ = tokenize_state(state_, scenario_, config_.quantization);
  auto record = make_record(Tier::kNearRt);
  record.audit.push_back("initial state");
  push(std::move(record));
}

bool LoopEngine::finished() const {
  return state_.tick >= config_.max_ticks || (config_.stop_at_fixed_point && fixed_point_);
}

std::string LoopEngine::stop_reason() const {
  if (fixed_point_) return "fixed point at tick " + std::to_string(fixed_point_->tick);
  if (state_.tick >= config_.max_ticks) return "no fixed point within budget";
  return "running";
}

void LoopEngine::post_intent(Intent intent) { next_intent_ = std::move(intent); }

GateResult LoopEngine::resolve(const std::string& decision_id, bool approve) {
  auto it = proposals_.find(decision_id);
  if (it == proposals_.end()) return GateResult::kUnknown;
  if (it->second.status != GateStatus::kPending) return GateResult::kConflict;
  it->second.status = approve ? GateStatus::kApproved : GateStatus::kRejected;
  return GateResult::kAccepted;
}

TrajectoryRecord LoopEngine::make_record(Tier tier) const {
  TrajectoryRecord r;
  r.tick = state_.tick;
  r.state_digest = state_digest(state_);
  r.context_digest = context_.digest;
  r.kpis = compute_kpis(state_, scenario_);
  r.utility = utility(r.kpis, weights_, normalizer_);
  r.tier = tier;
  r.objective = objective_name(intent_.objective);
  return r;
}

void LoopEngine::push(TrajectoryRecord record) {
  records_.push_back(std::move(record));
  if (config_.keep_states) states_.push_back(state_);
  if (config_.retain_records > 0) {
    while (records_.size() > config_.retain_records) records_.pop_front();
    while (states_.size() > config_.retain_records) states_.pop_front();
  }
}

LoopEngine::Decision LoopEngine::gate_step() {
  Decision d;
  Proposal& p = proposals_.at(*outstanding_);
  d.id = p.id;
  d.proposed = p.text;
  const std::uint64_t age = state_.tick - p.proposed_tick;
  switch (p.status) {
    case GateStatus::kApproved:
      d.issued = p.commands;
      d.audit.push_back("operator-approved " + p.id);
      p.status = GateStatus::kIssued;
      outstanding_.reset();
      break;
    case GateStatus::kRejected:
      d.issued = kNoop;
      d.audit.push_back("operator-rejected " + p.id);
      outstanding_.reset();
      break;
    case GateStatus::kPending:
      d.issued = kNoop;
      if (age >= config_.gate_timeout_periods * config_.non_rt_period) {
        p.status = GateStatus::kExpired;
        d.audit.push_back("gate-timeout " + p.id + ": treated as operator-rejected");
        outstanding_.reset();
      } else {
        d.audit.push_back("awaiting-operator " + p.id);
      }
      break;
    default:
      d.issued = kNoop;
      outstanding_.reset();
      break;
  }
  return d;
}

LoopEngine::Decision LoopEngine::decide_at_boundary() {
  if (outstanding_) return gate_step();

  Decision d;
  if (!intent_.active_at(state_.tick)) {
    d.issued = kNoop;
    d.audit.push_back("intent-inactive");
    return d;
  }
  d.id = "d" + std::to_string(state_.tick);
  Program proposal;
  try {
    proposal = policy_.decide(DecisionInput{intent_, state_, context_, scenario_});
    if (proposal.empty()) proposal = kNoop;
  } catch (const std::exception& e) {
    ++faults_;
    d.audit.push_back(std::string("policy-fault: ") + e.what());
    if (faults_ > config_.fault_budget) {
      throw FaultBudgetExceeded("policy fault budget of " + std::to_string(config_.fault_budget) +
                                " exceeded at tick " + std::to_string(state_.tick) + ": " + e.what());
    }
    proposal = kNoop;
  }
  for (auto& line : policy_.drain_log()) d.audit.push_back("policy-log: " + line);
  d.proposed = print_program(proposal);

  if (config_.gate == GateMode::kManual && proposal != kNoop) {
    proposals_[*d.id] = Proposal{*d.id, proposal, d.proposed, state_.tick, GateStatus::kPending};
    outstanding_ = *d.id;
    d.issued = kNoop;
    d.audit.push_back("awaiting-operator " + *d.id);
    return d;
  }
  d.issued = std::move(proposal);
  return d;
}

const TrajectoryRecord& LoopEngine::advance() {
  if (finished()) return records_.back();
  const bool boundary = state_.tick % config_.non_rt_period == 0;

  std::vector<std::string> audit;
  Decision decision;
  if (boundary) {
    if (next_intent_) {
      intent_ = std::move(*next_intent_);
      next_intent_.reset();
      weights_ = weights_for(intent_);
      audit.push_back(std::string("intent-replaced: ") + objective_name(intent_.objective));
    }
    decision = decide_at_boundary();
  }

  std::vector<InterfaceMessage> messages;
  std::string issued_text;
  if (boundary) {
    auto guarded = guard(decision.issued, make_scope(scenario_, state_.config));
    if (guarded) {
      messages = compile(*guarded, state_.tick);
      issued_text = print_program(decision.issued);
    } else {
      for (const auto& reason : guarded.error().describe()) decision.verdict.push_back(reason);
      decision.audit.push_back("guard-rejected: " + join(decision.verdict));
      issued_text = print_program(kNoop);
    }
  }

  const RanState previous = state_;
  state_ = step(previous, apply(messages, previous, scenario_), scenario_);
  context_ = tokenize_state(state_, scenario_, config_.quantization);

  TrajectoryRecord record = make_record(boundary ? Tier::kNonRt : Tier::kNearRt);
  record.residual = state_distance(state_, previous, config_.norm);
  record.commands = std::move(issued_text);
  record.messages = std::move(messages);
  if (boundary) {
    record.proposed = std::move(decision.proposed);
    record.verdict = std::move(decision.verdict);
    record.decision_id = std::move(decision.id);
    audit.insert(audit.end(), decision.audit.begin(), decision.audit.end());
  }
  record.audit = std::move(audit);

  below_eps_ = record.residual < config_.eps_fp ? below_eps_ + 1 : 0;
  if (!fixed_point_ && below_eps_ >= config_.confirmation_window()) {
    const std::uint64_t first = record.tick + 1 - config_.confirmation_window();
    // The first record of the window is still retained unless retention is
    // shorter than the window; fall back to the current digest then.
    std::string digest = record.state_digest;
    for (const auto& r : records_) {
      if (r.tick == first) digest = r.state_digest;
    }
    fixed_point_ = FixedPoint{first, digest};
  }
  push(std::move(record));
  return records_.back();
}

RunResult run(const ScenarioConfig& scenario, const Intent& intent, Policy& policy, const LoopConfig& config,
              const RecordObserver& observer, std::optional<RanState> initial) {
  LoopEngine engine(scenario, intent, policy, config, std::move(initial));
  if (observer) observer(engine.records().back());
  while (!engine.finished()) {
    const auto& record = engine.advance();
    if (observer) observer(record);
  }
  RunResult out;
  out.records.assign(engine.records().begin(), engine.records().end());
  out.states.assign(engine.states().begin(), engine.states().end());
  out.final_state = engine.state();
  out.fixed_point = engine.fixed_point();
  out.stop_reason = engine.stop_reason();
  out.faults = engine.faults();
  return out;
}

std::function<RanState(const RanState&)> closed_loop_map(Policy& policy, const Intent& intent,
                                                          const ScenarioConfig& scenario,
                                                          const QuantizationSpec& quantization) {
  return [&policy, intent, scenario, quantization](const RanState& s) {
    const StateContext context = tokenize_state(s, scenario, quantization);
    const Program program = policy.decide(DecisionInput{intent, s, context, scenario});
    auto guarded = guard(program, make_scope(scenario, s.config));
    if (!guarded) return step(s, ConfigDelta{}, scenario);
    return step(s, apply(compile(*guarded, s.tick), s, scenario), scenario);
  };
}

}  // namespace ranop
