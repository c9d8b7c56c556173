#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranop/dsl.hpp"
#include "ranop/env.hpp"
#include "ranop/intent.hpp"
#include "ranop/telemetry.hpp"

namespace ranop {

// Per-KPI scales applied before the weighted sum.
struct KpiNormalizer {
  double throughput = 1.0;  // bit/s
  double latency = 1.0;     // s
  double energy = 1.0;      // W

  // Throughput by the sum over users of bw * log2(1 + P_max_cell * g_serving / N0),
  // energy by P_max plus static draw of every carrier.
  static KpiNormalizer for_scenario(const ScenarioConfig& scenario, double latency_scale = 1.0);
};

double utility(const KpiVector& kpis, const WeightVector& w, const KpiNormalizer& norm = {});
double utility(const RanState& state, const ScenarioConfig& scenario, const WeightVector& w,
               const KpiNormalizer& norm);

// U(s') - U(s) with s' = step(s, apply(compile(guard(a)))). Throws ConfigError
// when the guard rejects `action`.
double reward(const RanState& state, std::span<const Command> action, const WeightVector& w,
              const ScenarioConfig& scenario, const KpiNormalizer& norm);

// Finite action set. Candidates are generated in a fixed order: noop, the
// Cartesian product of per-cell power levels, weight simplex points, single
// carrier toggles. Truncated to max_candidates (noop always kept).
struct CandidateGrid {
  std::vector<std::vector<double>> power_levels_dbm;  // per cell; empty = not varied
  double weight_step = 0.0;                           // 0 disables weight candidates
  bool carrier_toggles = false;
  std::size_t max_candidates = 512;

  // `levels` evenly spaced dB steps from P_max_cell down by `span_db`.
  static CandidateGrid for_scenario(const ScenarioConfig& scenario, int levels = 3, double span_db = 10.0);
};

std::vector<Program> enumerate_candidates(const CandidateGrid& grid, const RanState& state,
                                          const ScenarioConfig& scenario);

struct GreedyChoice {
  Program action;
  double utility = 0.0;
  KpiVector kpis;
  std::size_t evaluated = 0;  // candidates that passed guard and constraints
};

// argmax over admissible candidates of U(step(state, a)). Admissible means the
// guard accepts and, except for noop, every intent constraint holds on the
// successor. Ties: lower energy, then canonical print order.
GreedyChoice greedy_decide(const Intent& intent, const RanState& state, const CandidateGrid& grid,
                           const ScenarioConfig& scenario, const KpiNormalizer& norm,
                           const LatencyWeights& latency = {});

// p' = p + G (target - p) in watts, clipped to [max(P_min, floor), P_max_cell]
// and scaled down to fit P_max when needed.
struct LinearPolicyParams {
  std::vector<double> gain;  // cells x cells, row-major
  std::vector<double> target_w;
  double floor_w = 1e-30;  // keeps emitted dBm finite

  static LinearPolicyParams diagonal(std::size_t cells, double g, double target_w = 0.0);
};

Program linear_decide(const LinearPolicyParams& params, const RanState& state, const ScenarioConfig& scenario);

struct DecisionInput {
  const Intent& intent;
  const RanState& state;
  const StateContext& context;
  const ScenarioConfig& scenario;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Total. Returned lists pass validate under make_scope(scenario, state.config).
  virtual Program decide(const DecisionInput& input) = 0;
  // Faults the policy absorbed since the last call (raw replies, verdicts).
  virtual std::vector<std::string> drain_log() { return {}; }
};

class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(std::optional<CandidateGrid> grid = std::nullopt, LatencyWeights latency = {},
                        double latency_scale = 1.0)
      : grid_(std::move(grid)), latency_(latency), latency_scale_(latency_scale) {}
  std::string name() const override { return "greedy"; }
  Program decide(const DecisionInput& input) override;

 private:
  std::optional<CandidateGrid> grid_;
  LatencyWeights latency_;
  double latency_scale_;
};

class LinearPolicy : public Policy {
 public:
  explicit LinearPolicy(LinearPolicyParams params) : params_(std::move(params)) {}
  std::string name() const override { return "linear"; }
  Program decide(const DecisionInput& input) override;

 private:
  LinearPolicyParams params_;
};

struct CompletionEndpoint {
  std::string host = "127.0.0.1";
  int port = 8081;
  std::string route = "/complete";
  int timeout_ms = 2000;
  std::size_t max_reply_bytes = 64 * 1024;
};

// Text sent ahead of the state tokens.
std::string intent_preamble(const Intent& intent);

// Reply text -> commands. Falls back to noop on framing, parse or validation
// failure, appending a description of the fault to `log`.
Program interpret_reply(std::string_view reply, const ValidationScope& scope, std::vector<std::string>& log);

// Posts {"preamble", "context"} as JSON; the reply body (or its "text" field
// when it is a JSON object) is scanned for <ACTION> framing.
class ExternalPolicy : public Policy {
 public:
  explicit ExternalPolicy(CompletionEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string name() const override { return "external"; }
  Program decide(const DecisionInput& input) override;
  std::vector<std::string> drain_log() override;

 private:
  CompletionEndpoint endpoint_;
  std::vector<std::string> log_;
};

}  // namespace ranop
