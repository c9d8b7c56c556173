#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ranop/loop.hpp"
#include "ranop/scenario_io.hpp"
#include "ranop/trajectory_io.hpp"
#include "support.hpp"

using namespace ranop;

namespace {

Intent objective(Objective o) {
  Intent i;
  i.objective = o;
  return i;
}

class ThrowingPolicy : public Policy {
 public:
  std::string name() const override { return "throwing"; }
  Program decide(const DecisionInput&) override { throw std::runtime_error("boom"); }
};

class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string name() const override { return "scripted"; }
  Program decide(const DecisionInput&) override {
    const std::string& text = script_[calls_++ % script_.size()];
    return *parse_program(text);
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::string> script_;
  std::size_t calls_ = 0;
};

RanState perturbed(const ScenarioConfig& s, std::mt19937_64& rng) {
  RanState st = initial_state(s);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& g : st.channel.gains) g *= 1.0 + 0.5 * u(rng);
  for (double& q : st.queues.bits) q = std::max(0.0, q + 1000.0 * u(rng));
  for (double& p : st.config.powers_dbm) p += 3.0 * u(rng);
  for (std::size_t c = 0; c < st.config.carrier_active.size(); ++c) {
    if (u(rng) > 0.8) st.config.carrier_active[c] = !st.config.carrier_active[c];
  }
  refresh_interference(st, s);
  return st;
}

}  // namespace

TEST(Norm, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = ranop::testing::random_scenario(seed);
    NormSpec n;
    n.channel.scale = 1e-9;
    n.queues.scale = 1e4;
    n.sinr.scale = 100.0;
    for (int i = 0; i < 20; ++i) {
      const auto a = perturbed(s, rng), b = perturbed(s, rng), c = perturbed(s, rng);
      const double ab = state_distance(a, b, n), ba = state_distance(b, a, n);
      EXPECT_EQ(state_distance(a, a, n), 0.0);
      EXPECT_EQ(ab, ba);
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(state_distance(a, c, n), ab + state_distance(b, c, n) + 1e-12 * (1.0 + ab));
    }
  }
}

TEST(Norm, CarrierFlipCountsOne) {
  const auto s = ranop::testing::two_by_two();
  RanState a = initial_state(s);
  RanState b = a;
  b.config.carrier_active[1] = false;
  NormSpec n;
  n.powers.weight = n.sinr.weight = 0.0;  // isolate the Hamming term
  EXPECT_EQ(state_distance(a, b, n), 1.0);
  n.carriers = 2.5;
  EXPECT_EQ(state_distance(a, b, n), 2.5);
}

TEST(Norm, PowersInWatts) {
  const auto s = ranop::testing::scalar_scenario(40.0);
  RanState a = initial_state(s), b = a;
  b.config.powers_dbm[0] = 30.0;
  NormSpec n;
  n.sinr.weight = 0.0;
  EXPECT_NEAR(state_distance(a, b, n), 9.0, 1e-12);
  n.powers.scale = 3.0;
  n.powers.weight = 4.0;
  EXPECT_NEAR(state_distance(a, b, n), std::sqrt(4.0 * 9.0), 1e-12);
}

TEST(Norm, ShapeMismatchThrows) {
  const auto a = initial_state(ranop::testing::two_by_two());
  const auto b = initial_state(ranop::testing::scalar_scenario());
  EXPECT_THROW(state_distance(a, b), ConfigError);
  NormSpec bad;
  bad.queues.scale = 0.0;
  EXPECT_FALSE(bad.valid());
}

TEST(Lipschitz, ScalarMapsOnTheReal) {
  auto sample = [](std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-100.0, 100.0)(rng); };
  auto dist = [](double a, double b) { return std::abs(a - b); };
  EXPECT_NEAR(estimate_lipschitz<double>([](double s) { return 0.7 * s; }, sample, dist, 1000, 42), 0.7, 1e-9);
  EXPECT_NEAR(estimate_lipschitz<double>([](double s) { return s; }, sample, dist, 1000, 42), 1.0, 1e-9);
  EXPECT_NEAR(estimate_lipschitz<double>([](double s) { return 0.5 * s + 3.0; }, sample, dist, 1000, 42), 0.5, 1e-9);
  EXPECT_THROW(estimate_lipschitz<double>([](double s) { return s; }, [](std::mt19937_64&) { return 1.0; }, dist, 10, 1),
               ConfigError);
}

TEST(Lipschitz, LinearPolicyClosedLoop) {
  const auto s = load_scenario(std::string(RANOP_SOURCE_DIR) + "/scenarios/linear_reference.json");
  LinearPolicy policy(LinearPolicyParams::diagonal(1, 0.3));
  auto F = closed_loop_map(policy, objective(Objective::kMinimizeEnergy), s);
  auto sample = [&](std::mt19937_64& rng) {
    RanState st = initial_state(s);
    st.config.powers_dbm[0] = watts_to_dbm(std::uniform_real_distribution<double>(1e-3, s.p_max_cell_w)(rng));
    refresh_interference(st, s);
    return st;
  };
  NormSpec n;
  n.sinr.weight = 0.0;
  EXPECT_NEAR(estimate_lipschitz(F, sample, n, 300, 9), 0.7, 1e-9);
}

TEST(FixedPoint, DetectorOnSyntheticResiduals) {
  const std::vector<double> constant(10, 0.0);
  EXPECT_EQ(detect_fixed_point(constant, 1e-8, 3), std::optional<std::size_t>(1));

  std::vector<double> diverging{0.0, 1.0};
  for (int i = 0; i < 50; ++i) diverging.push_back(diverging.back() * 1.1);
  EXPECT_FALSE(detect_fixed_point(diverging, 1e-8, 3));

  std::vector<double> contracting{0.0, 1.0};
  for (int i = 0; i < 100; ++i) contracting.push_back(contracting.back() * 0.5);
  // 0.5^27 ~ 7.45e-9 is the first residual below 1e-8; it sits at index 28.
  EXPECT_EQ(detect_fixed_point(contracting, 1e-8, 3), std::optional<std::size_t>(28));

  std::vector<double> blip(12, 0.0);
  blip[3] = 1.0;
  EXPECT_EQ(detect_fixed_point(blip, 1e-8, 5), std::optional<std::size_t>(4));
}

TEST(Engine, ZeroTicksYieldsInitialRecordOnly) {
  const auto s = ranop::testing::two_by_two();
  GreedyPolicy policy;
  LoopConfig cfg;
  cfg.max_ticks = 0;
  const auto r = run(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].audit, (std::vector<std::string>{"initial state"}));
  EXPECT_EQ(r.stop_reason, "no fixed point within budget");
}

TEST(Engine, TimescaleSeparation) {
  auto s = ranop::testing::two_by_two();
  s.mode = EnvMode::kQuasiStatic;
  finalize_scenario(s);
  ScriptedPolicy policy({"set_power(cell_1=20dBm)", "set_power(cell_1=25dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 10;
  cfg.max_ticks = 35;
  cfg.stop_at_fixed_point = false;
  const auto r = run(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  ASSERT_EQ(r.records.size(), 36u);
  EXPECT_EQ(policy.calls(), 4u);  // ticks 0, 10, 20, 30
  for (const auto& rec : r.records) {
    const bool after_boundary = rec.tick > 0 && (rec.tick - 1) % 10 == 0;
    EXPECT_EQ(rec.tier, after_boundary ? Tier::kNonRt : Tier::kNearRt) << rec.tick;
    EXPECT_EQ(!rec.commands.empty(), after_boundary) << rec.tick;
  }
  EXPECT_EQ(r.records[1].commands, "set_power(cell_1=20dBm)");
  EXPECT_EQ(r.records[11].commands, "set_power(cell_1=25dBm)");
  EXPECT_EQ(r.records[1].decision_id, std::optional<std::string>("d0"));
  // Between boundaries the configuration is held.
  EXPECT_EQ(r.final_state.config.powers_dbm[0], 25.0);
}

TEST(Engine, IntentReplacedAtBoundary) {
  const auto s = ranop::testing::two_by_two();
  GreedyPolicy policy;
  LoopConfig cfg;
  cfg.non_rt_period = 5;
  cfg.max_ticks = 20;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMaximizeThroughput), policy, cfg);
  engine.advance();
  engine.advance();
  engine.post_intent(objective(Objective::kMinimizeEnergy));
  while (engine.state().tick < 5) {
    EXPECT_EQ(engine.active_intent().objective, Objective::kMaximizeThroughput);
    engine.advance();
  }
  const auto& rec = engine.advance();  // boundary at tick 5
  EXPECT_EQ(rec.tick, 6u);
  EXPECT_EQ(rec.audit.at(0), "intent-replaced: minimize_energy");
  EXPECT_EQ(rec.objective, "minimize_energy");
  EXPECT_FALSE(engine.pending_intent());
}

TEST(Engine, InactiveIntentHoldsNoop) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_1=20dBm)"});
  Intent i = objective(Objective::kMinimizeEnergy);
  i.scope.window = TimeWindow{2, 3};
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.max_ticks = 5;
  cfg.stop_at_fixed_point = false;
  const auto r = run(s, i, policy, cfg);
  EXPECT_EQ(policy.calls(), 1u);
  EXPECT_EQ(r.records[1].audit, (std::vector<std::string>{"intent-inactive"}));
  EXPECT_EQ(r.records[3].commands, "set_power(cell_1=20dBm)");
}

TEST(Gate, ApproveIssuesAtNextBoundary) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_1=20dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 2;
  cfg.max_ticks = 50;
  cfg.gate = GateMode::kManual;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  const auto& first = engine.advance();
  EXPECT_EQ(first.commands, "noop()");
  EXPECT_EQ(first.proposed, "set_power(cell_1=20dBm)");
  EXPECT_EQ(engine.proposals().at("d0").status, GateStatus::kPending);
  engine.advance();
  EXPECT_EQ(engine.advance().audit, (std::vector<std::string>{"awaiting-operator d0"}));
  EXPECT_EQ(engine.resolve("d0", true), GateResult::kAccepted);
  EXPECT_EQ(engine.resolve("d0", false), GateResult::kConflict);
  EXPECT_EQ(engine.resolve("d9", true), GateResult::kUnknown);
  engine.advance();
  const auto& issued = engine.advance();  // boundary at tick 4
  EXPECT_EQ(issued.commands, "set_power(cell_1=20dBm)");
  EXPECT_EQ(issued.decision_id, std::optional<std::string>("d0"));
  EXPECT_EQ(engine.proposals().at("d0").status, GateStatus::kIssued);
  EXPECT_EQ(engine.state().config.powers_dbm[0], 20.0);
  EXPECT_EQ(policy.calls(), 1u);
}

TEST(Gate, RejectIssuesNoop) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_1=20dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.max_ticks = 50;
  cfg.gate = GateMode::kManual;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  engine.advance();
  ASSERT_EQ(engine.resolve("d0", false), GateResult::kAccepted);
  const auto& rec = engine.advance();
  EXPECT_EQ(rec.commands, "noop()");
  EXPECT_EQ(rec.audit, (std::vector<std::string>{"operator-rejected d0"}));
  EXPECT_EQ(engine.state().config.powers_dbm[0], 30.0);
  engine.advance();
  EXPECT_EQ(policy.calls(), 2u);  // a fresh proposal once the old one is settled
  EXPECT_TRUE(engine.proposals().count("d2"));
}

TEST(Gate, TimeoutExpires) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_1=20dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.gate_timeout_periods = 3;
  cfg.max_ticks = 50;
  cfg.gate = GateMode::kManual;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  for (int i = 0; i < 3; ++i) engine.advance();
  const auto& rec = engine.advance();  // tick 3: age 3
  EXPECT_EQ(rec.audit.at(0), "gate-timeout d0: treated as operator-rejected");
  EXPECT_EQ(engine.proposals().at("d0").status, GateStatus::kExpired);
  EXPECT_EQ(engine.resolve("d0", true), GateResult::kConflict);
}

TEST(Faults, BudgetExceededThrows) {
  const auto s = ranop::testing::two_by_two();
  ThrowingPolicy policy;
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.fault_budget = 2;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  const auto& a = engine.advance();
  EXPECT_EQ(a.commands, "noop()");
  EXPECT_EQ(a.audit, (std::vector<std::string>{"policy-fault: boom"}));
  engine.advance();
  EXPECT_EQ(engine.faults(), 2u);
  EXPECT_THROW(engine.advance(), FaultBudgetExceeded);
}

TEST(Faults, GuardRejectionIsRecorded) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_9=20dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.max_ticks = 3;
  cfg.fault_budget = 0;
  cfg.stop_at_fixed_point = false;
  const auto r = run(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  EXPECT_EQ(r.faults, 0u);
  EXPECT_EQ(r.records[1].commands, "noop()");
  ASSERT_FALSE(r.records[1].verdict.empty());
  EXPECT_NE(r.records[1].verdict[0].find("cell_9"), std::string::npos);
  EXPECT_EQ(r.records[1].audit.back().rfind("guard-rejected: ", 0), 0u);
}

TEST(Engine, LinearReferenceConverges) {
  const auto s = load_scenario(std::string(RANOP_SOURCE_DIR) + "/scenarios/linear_reference.json");
  LinearPolicy policy(LinearPolicyParams::diagonal(1, 0.3));
  LoopConfig cfg;
  cfg.non_rt_period = 1;
  cfg.max_ticks = 500;
  cfg.keep_states = true;
  const auto r = run(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  ASSERT_TRUE(r.fixed_point);
  EXPECT_EQ(r.stop_reason, "fixed point at tick " + std::to_string(r.fixed_point->tick));
  EXPECT_NEAR(*residual_ratio(r.records), 0.7, 1e-9);
  EXPECT_EQ(r.states.size(), r.records.size());
  const auto again = detect_fixed_point(std::span<const TrajectoryRecord>(r.records), cfg.eps_fp, cfg.confirmation_window());
  ASSERT_TRUE(again);
  EXPECT_EQ(again->tick, r.fixed_point->tick);
}

TEST(Engine, RetentionBoundsMemory) {
  const auto s = ranop::testing::two_by_two();
  GreedyPolicy policy;
  LoopConfig cfg;
  cfg.non_rt_period = 3;
  cfg.max_ticks = 40;
  cfg.retain_records = 10;
  cfg.stop_at_fixed_point = false;
  LoopEngine engine(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  while (!engine.finished()) engine.advance();
  EXPECT_EQ(engine.records().size(), 10u);
  EXPECT_EQ(engine.records().back().tick, 40u);
}

TEST(Config, CheckRejectsNonsense) {
  LoopConfig cfg;
  cfg.non_rt_period = 0;
  EXPECT_THROW(cfg.check(), ConfigError);
  cfg = {};
  cfg.eps_fp = -1.0;
  EXPECT_THROW(cfg.check(), ConfigError);
}

TEST(Trajectory, JsonlRoundTrip) {
  const auto s = ranop::testing::two_by_two();
  ScriptedPolicy policy({"set_power(cell_1=20dBm); set_carrier(carrier_2, off)", "set_power(cell_9=1dBm)"});
  LoopConfig cfg;
  cfg.non_rt_period = 2;
  cfg.max_ticks = 8;
  cfg.stop_at_fixed_point = false;
  const auto r = run(s, objective(Objective::kMinimizeEnergy), policy, cfg);
  std::stringstream io;
  write_jsonl(io, r.records);
  const auto back = read_jsonl(io);
  ASSERT_EQ(back.size(), r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(record_to_json(back[i]).dump(), record_to_json(r.records[i]).dump()) << i;
    EXPECT_EQ(back[i].messages, r.records[i].messages);
  }
  const auto doc = record_to_json(r.records[1]);
  EXPECT_EQ(doc["tier"], "non-rt");
  EXPECT_EQ(doc["e2"].size(), 1u);
  EXPECT_EQ(doc["o1"].size(), 1u);
  EXPECT_TRUE(record_to_json(r.records[0])["decision_id"].is_null());
}
