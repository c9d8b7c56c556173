// ranop: run, probe and serve the closed RAN control loop.
//
//   ranop run --scenario S --intent I [--policy greedy|linear|external] [--ticks N] [--out FILE]
//   ranop lipschitz --scenario S --intent I [--policy ...] [--samples N] [--seed K]
//   ranop validate PROGRAM_FILE [--scenario S]
//   ranop serve --scenario S --intent I [--bind HOST:PORT] [--gate manual|auto]
//
// Exit codes: 0 ok, 1 program rejected (validate), 2 config error,
// 3 scenario error, 4 policy fault budget exceeded.

#include <csignal>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ranop/loop.hpp"
#include "ranop/scenario_io.hpp"
#include "ranop/service.hpp"
#include "ranop/trajectory_io.hpp"

using namespace ranop;

namespace {

struct Common {
  std::string scenario;
  std::string intent;
  std::string policy = "greedy";
  double linear_gain = 0.3;
  std::string endpoint = "127.0.0.1:8081";
  int levels = 3;
  double span_db = 10.0;
  double weight_step = 0.0;
  bool carrier_toggles = false;
  std::uint64_t period = 100;
  double eps = 1e-8;
  std::size_t fault_budget = 10;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario JSON")->required();
  cmd->add_option("--intent", c.intent, "intent JSON (default: maximize_throughput)");
  cmd->add_option("--policy", c.policy, "greedy | linear | external")
      ->check(CLI::IsMember({"greedy", "linear", "external"}));
  cmd->add_option("--gain", c.linear_gain, "linear policy gain G (diagonal)");
  cmd->add_option("--endpoint", c.endpoint, "external completion service HOST:PORT");
  cmd->add_option("--levels", c.levels, "greedy power levels per cell");
  cmd->add_option("--span-db", c.span_db, "greedy power level span below P_max_cell");
  cmd->add_option("--weight-step", c.weight_step, "greedy scheduler weight grid step (0 = off)");
  cmd->add_flag("--carrier-toggles", c.carrier_toggles, "greedy considers switching carriers");
  cmd->add_option("--period", c.period, "non-rt period in ticks");
  cmd->add_option("--eps", c.eps, "fixed-point residual tolerance");
  cmd->add_option("--fault-budget", c.fault_budget, "policy exceptions tolerated");
}

std::pair<std::string, int> split_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ConfigError("expected HOST:PORT, got '" + text + "'");
  try {
    return {text.substr(0, colon), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad port in '" + text + "'");
  }
}

Intent load_intent(const std::string& path) {
  if (path.empty()) return Intent{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read intent file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto intent = parse_intent(ss.str());
  if (!intent) throw ConfigError("intent " + path + intent.error().path + ": " + intent.error().reason);
  if (!permitted(*intent)) throw ConfigError("intent " + path + " is outside the permitted goal policy");
  return *intent;
}

std::unique_ptr<Policy> make_policy(const Common& c, const ScenarioConfig& scenario) {
  if (c.policy == "linear") {
    return std::make_unique<LinearPolicy>(LinearPolicyParams::diagonal(scenario.cells, c.linear_gain));
  }
  if (c.policy == "external") {
    CompletionEndpoint e;
    std::tie(e.host, e.port) = split_host_port(c.endpoint);
    return std::make_unique<ExternalPolicy>(e);
  }
  CandidateGrid grid = CandidateGrid::for_scenario(scenario, c.levels, c.span_db);
  grid.weight_step = c.weight_step;
  grid.carrier_toggles = c.carrier_toggles;
  return std::make_unique<GreedyPolicy>(grid);
}

LoopConfig loop_config(const Common& c) {
  LoopConfig loop;
  loop.non_rt_period = c.period;
  loop.eps_fp = c.eps;
  loop.fault_budget = c.fault_budget;
  return loop;
}

int cmd_run(const Common& c, std::uint64_t ticks, const std::string& out_path) {
  const ScenarioConfig scenario = load_scenario(c.scenario);
  const Intent intent = load_intent(c.intent);
  auto policy = make_policy(c, scenario);
  LoopConfig loop = loop_config(c);
  loop.max_ticks = ticks;

  std::ofstream file;
  std::ostream* out = nullptr;
  if (out_path == "-") {
    out = &std::cout;
  } else if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("cannot write " + out_path);
    out = &file;
  }
  auto result = run(scenario, intent, *policy, loop, [&](const TrajectoryRecord& r) {
    if (out) *out << record_to_json(r).dump() << '\n';
  });

  nlohmann::json summary = {{"ticks", result.final_state.tick},
                            {"status", result.stop_reason},
                            {"faults", result.faults},
                            {"final_kpis", kpis_to_json(compute_kpis(result.final_state, scenario))},
                            {"final_utility", result.records.back().utility}};
  if (result.fixed_point) {
    summary["fixed_point"] = {{"tick", result.fixed_point->tick}, {"state_digest", result.fixed_point->state_digest}};
  }
  if (auto k = residual_ratio(result.records)) summary["residual_ratio"] = *k;
  (out == &std::cout ? std::cerr : std::cout) << summary.dump(2) << '\n';
  return 0;
}

int cmd_lipschitz(const Common& c, std::size_t samples, std::uint64_t seed) {
  const ScenarioConfig scenario = load_scenario(c.scenario);
  const Intent intent = load_intent(c.intent);
  auto policy = make_policy(c, scenario);
  const RanState base = initial_state(scenario);
  const double lo = std::max(scenario.p_min_w, 1e-6 * scenario.p_max_cell_w);

  // Random configurations inside the per-cell and total budgets; channel and
  // queues stay at the scenario's initial values.
  auto sample = [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, scenario.p_max_cell_w);
    RanState s = base;
    double total = 0.0;
    std::vector<double> w(scenario.cells);
    for (auto& p : w) total += (p = u(rng));
    const double scale = total > scenario.p_max_w ? scenario.p_max_w / total : 1.0;
    for (std::size_t m = 0; m < scenario.cells; ++m) s.config.powers_dbm[m] = watts_to_dbm(std::max(w[m] * scale, lo));
    refresh_interference(s, scenario);
    return s;
  };
  const double k = estimate_lipschitz(closed_loop_map(*policy, intent, scenario), sample, NormSpec{}, samples, seed);
  std::cout << nlohmann::json{{"k_hat", k}, {"samples", samples}, {"seed", seed}, {"policy", policy->name()}}.dump(2)
            << '\n';
  return 0;
}

int cmd_validate(const std::string& program_path, const std::string& scenario_path) {
  std::ifstream in(program_path);
  if (!in) throw ConfigError("cannot read " + program_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  auto program = parse_program(text);
  if (!program) {
    std::cout << "parse error: " << program.error().describe() << '\n';
    return 1;
  }
  ScenarioConfig scenario;
  if (scenario_path.empty()) {
    // One cell, one user, default ids and budgets.
    scenario.gains = {1e-10};
    scenario.bandwidth_hz = {1e6};
    finalize_scenario(scenario);
  } else {
    scenario = load_scenario(scenario_path);
  }
  const Verdict verdict = validate(*program, make_scope(scenario, initial_state(scenario).config));
  if (!verdict.accepted) {
    std::cout << "rejected\n";
    for (const auto& reason : verdict.describe()) std::cout << "  " << reason << '\n';
    return 1;
  }
  std::cout << "accepted: " << print_program(*program) << '\n';
  return 0;
}

LoopService* g_service = nullptr;

extern "C" void on_signal(int) {
  // stop() joins threads; hand it to a detached helper so the handler returns.
  if (g_service) std::thread([] { g_service->stop(); }).detach();
}

int cmd_serve(const Common& c, const std::string& bind, const std::string& gate, int pace_ms, std::uint64_t ticks) {
  const ScenarioConfig scenario = load_scenario(c.scenario);
  const Intent intent = load_intent(c.intent);
  LoopConfig loop = loop_config(c);
  loop.max_ticks = ticks;
  loop.stop_at_fixed_point = false;
  loop.gate = gate == "manual" ? GateMode::kManual : GateMode::kAuto;
  loop.retain_records = 10000;

  ServiceOptions options;
  std::tie(options.host, options.port) = split_host_port(bind);
  options.pace_ms = pace_ms;
  LoopService service(scenario, intent, make_policy(c, scenario), loop, options);
  const int port = service.start();
  std::cerr << "serving on " << options.host << ':' << port << " (gate " << gate << ")\n";
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const std::string halted = service.wait();
  g_service = nullptr;
  service.stop();
  if (!halted.empty()) {
    std::cerr << halted << '\n';
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop RAN control: simulate, probe and serve"};
  app.require_subcommand(1);

  Common run_opts, lip_opts, serve_opts;
  std::uint64_t run_ticks = 1000;
  std::string out_path;
  auto* run_cmd = app.add_subcommand("run", "run the loop and write a JSONL trajectory");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--ticks", run_ticks, "maximum near-rt ticks");
  run_cmd->add_option("--out", out_path, "trajectory file ('-' for stdout)");

  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  auto* lip_cmd = app.add_subcommand("lipschitz", "estimate the closed-loop Lipschitz constant");
  add_common(lip_cmd, lip_opts);
  lip_cmd->add_option("--samples", samples, "state pairs");
  lip_cmd->add_option("--seed", seed, "sampling seed");

  std::string program_path, validate_scenario;
  auto* val_cmd = app.add_subcommand("validate", "parse and validate a command program");
  val_cmd->add_option("program", program_path, "DSL file")->required();
  val_cmd->add_option("--scenario", validate_scenario, "scenario giving the id scope and power bounds");

  std::string bind = "127.0.0.1:8080", gate = "auto";
  int pace_ms = 10;
  std::uint64_t serve_ticks = std::numeric_limits<std::uint64_t>::max();
  auto* serve_cmd = app.add_subcommand("serve", "host the loop behind the HTTP interface");
  add_common(serve_cmd, serve_opts);
  serve_cmd->add_option("--bind", bind, "HOST:PORT");
  serve_cmd->add_option("--gate", gate, "manual | auto")->check(CLI::IsMember({"manual", "auto"}));
  serve_cmd->add_option("--pace-ms", pace_ms, "wall-clock milliseconds per tick");
  serve_cmd->add_option("--ticks", serve_ticks, "stop advancing after this many ticks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, run_ticks, out_path);
    if (*lip_cmd) return cmd_lipschitz(lip_opts, samples, seed);
    if (*val_cmd) return cmd_validate(program_path, validate_scenario);
    if (*serve_cmd) return cmd_serve(serve_opts, bind, gate, pace_ms, serve_ticks);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 3;
  } catch (const FaultBudgetExceeded& e) {
    std::cerr << "policy fault budget exceeded: " << e.what() << '\n';
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
