#include "ranop/env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "ranop/common.hpp"

namespace ranop {

double QueueState::total() const { return std::accumulate(bits.begin(), bits.end(), 0.0); }

double ConfigState::power_w(std::size_t cell) const { return dbm_to_watts(powers_dbm[cell]); }

double InterferenceState::sinr_db(std::size_t user) const { return linear_to_db(sinr[user]); }

double KpiVector::get(Kpi k) const {
  switch (k) {
    case Kpi::kThroughput:
      return throughput;
    case Kpi::kLatency:
      return latency;
    case Kpi::kEnergy:
      return energy;
  }
  return 0.0;
}

const char* kpi_name(Kpi k) {
  switch (k) {
    case Kpi::kThroughput:
      return "throughput";
    case Kpi::kLatency:
      return "latency";
    case Kpi::kEnergy:
      return "energy";
  }
  return "?";
}

std::optional<Kpi> kpi_from_name(std::string_view name) {
  if (name == "throughput") return Kpi::kThroughput;
  if (name == "latency") return Kpi::kLatency;
  if (name == "energy") return Kpi::kEnergy;
  return std::nullopt;
}

const char* mode_name(EnvMode mode) {
  switch (mode) {
    case EnvMode::kConfigResponse:
      return "config-response";
    case EnvMode::kQuasiStatic:
      return "quasi-static";
    case EnvMode::kStochastic:
      return "stochastic";
  }
  return "?";
}

std::optional<EnvMode> mode_from_name(std::string_view name) {
  if (name == "config-response") return EnvMode::kConfigResponse;
  if (name == "quasi-static") return EnvMode::kQuasiStatic;
  if (name == "stochastic") return EnvMode::kStochastic;
  return std::nullopt;
}

namespace {

std::vector<std::string> numbered_ids(const std::string& prefix, std::size_t n, std::size_t base) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i + base));
  return ids;
}

void check_ids(const std::vector<std::string>& ids, std::size_t expected, const char* what) {
  if (ids.size() != expected) {
    throw ScenarioError(std::string(what) + " id list has " + std::to_string(ids.size()) +
                        " entries, expected " + std::to_string(expected));
  }
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        }) || std::isdigit(static_cast<unsigned char>(id[0]))) {
      throw ScenarioError(std::string(what) + " id '" + id + "' is not a valid identifier");
    }
    if (!seen.insert(id).second) throw ScenarioError(std::string(what) + " id '" + id + "' repeated");
  }
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void finalize_scenario(ScenarioConfig& s) {
  if (s.cells == 0 || s.users == 0 || s.flows == 0) {
    throw ScenarioError("cell, user and flow counts must be >= 1");
  }
  if (s.cell_ids.empty()) s.cell_ids = numbered_ids("cell_", s.cells, 1);
  if (s.user_ids.empty()) s.user_ids = numbered_ids("user_", s.users, 1);
  if (s.flow_ids.empty()) s.flow_ids = numbered_ids("flow_", s.flows, 0);
  if (s.carrier_ids.empty()) s.carrier_ids = numbered_ids("carrier_", s.cells, 1);
  check_ids(s.cell_ids, s.cells, "cell");
  check_ids(s.user_ids, s.users, "user");
  check_ids(s.flow_ids, s.flows, "flow");
  check_ids(s.carrier_ids, s.carrier_ids.size(), "carrier");
  check_ids(s.rb_ids, s.rb_ids.size(), "rb");

  if (s.cell_carrier.empty()) {
    for (std::size_t m = 0; m < s.cells; ++m) s.cell_carrier.push_back(m % s.carriers());
  }
  if (s.cell_carrier.size() != s.cells) throw ScenarioError("cell_carrier must list every cell");
  for (auto c : s.cell_carrier) {
    if (c >= s.carriers()) throw ScenarioError("cell_carrier references an unknown carrier");
  }
  if (s.serving_cell.empty()) {
    for (std::size_t k = 0; k < s.users; ++k) s.serving_cell.push_back(k % s.cells);
  }
  if (s.serving_cell.size() != s.users) throw ScenarioError("serving_cell must cover every user");
  for (auto m : s.serving_cell) {
    if (m >= s.cells) throw ScenarioError("serving_cell references an unknown cell");
  }

  if (s.gains.size() != s.users * s.cells) {
    std::size_t idx = s.gains.size();
    if (idx < s.users * s.cells) {
      throw ScenarioError("missing gain entry for (" + s.user_ids[idx / s.cells] + ", " +
                          s.cell_ids[idx % s.cells] + ")");
    }
    throw ScenarioError("gain table has too many entries");
  }
  for (double g : s.gains) {
    if (!finite_nonneg(g)) throw ScenarioError("gains must be finite and >= 0");
  }
  if (s.rx_antennas == 0 || s.tx_antennas == 0) throw ScenarioError("antenna counts must be >= 1");
  if (!s.channel_matrices.empty()) {
    if (s.channel_matrices.size() != s.users) throw ScenarioError("channel_matrices must cover every user");
    for (const auto& h : s.channel_matrices) {
      if (h.size() != s.rx_antennas * s.tx_antennas) {
        throw ScenarioError("channel matrix must have rx_antennas x tx_antennas entries");
      }
    }
  }

  if (!(s.noise_w > 0.0) || !std::isfinite(s.noise_w)) throw ScenarioError("noise power must be > 0");
  if (!(s.p_max_w > 0.0) || !std::isfinite(s.p_max_w)) throw ScenarioError("P_max must be > 0");
  if (!(s.p_max_cell_w > 0.0) || !std::isfinite(s.p_max_cell_w)) {
    throw ScenarioError("P_max_cell must be > 0");
  }
  if (!finite_nonneg(s.p_min_w) || s.p_min_w > s.p_max_cell_w) {
    throw ScenarioError("P_min must lie in [0, P_max_cell]");
  }

  if (s.arrival_rates.empty()) s.arrival_rates.assign(s.users * s.flows, 0.0);
  if (s.arrival_rates.size() != s.users * s.flows) throw ScenarioError("arrival_rates must be users x flows");
  for (double a : s.arrival_rates) {
    if (!finite_nonneg(a)) throw ScenarioError("arrival rates must be finite and >= 0");
  }
  if (s.bandwidth_hz.size() == 1 && s.users > 1) s.bandwidth_hz.assign(s.users, s.bandwidth_hz[0]);
  if (s.bandwidth_hz.size() != s.users) throw ScenarioError("bandwidth_hz must have one entry per user");
  for (double b : s.bandwidth_hz) {
    if (!finite_nonneg(b)) throw ScenarioError("bandwidth must be finite and >= 0");
  }
  if (!finite_nonneg(s.rb_bandwidth_hz)) throw ScenarioError("rb_bandwidth_hz must be >= 0");
  if (!finite_nonneg(s.static_carrier_w)) throw ScenarioError("static carrier draw must be >= 0");
  if (!(s.tick_seconds > 0.0) || !std::isfinite(s.tick_seconds)) throw ScenarioError("tick_seconds must be > 0");

  auto& init = s.initial;
  if (init.powers_dbm.empty()) {
    double per_cell = std::min(s.p_max_cell_w, s.p_max_w / static_cast<double>(s.cells));
    init.powers_dbm.assign(s.cells, watts_to_dbm(per_cell));
  }
  if (init.carrier_active.empty()) init.carrier_active.assign(s.carriers(), true);
  if (init.scheduler_weights.empty()) {
    init.scheduler_weights.assign(s.flows, 1.0 / static_cast<double>(s.flows));
  }
  if (init.queue_bits.empty()) init.queue_bits.assign(s.users * s.flows, 0.0);
  if (init.powers_dbm.size() != s.cells) throw ScenarioError("initial powers must cover every cell");
  if (init.carrier_active.size() != s.carriers()) throw ScenarioError("initial carriers must cover every carrier");
  if (init.scheduler_weights.size() != s.flows) throw ScenarioError("initial weights must cover every flow");
  if (init.queue_bits.size() != s.users * s.flows) throw ScenarioError("initial queues must be users x flows");

  auto violations = check_invariants(initial_state(s), s);
  if (!violations.empty()) throw ScenarioError("initial state invalid: " + violations.front());
}

std::vector<double> compute_sinr(const ChannelState& channel, const ConfigState& config,
                                 const ScenarioConfig& scenario) {
  const std::size_t users = scenario.users;
  const std::size_t cells = scenario.cells;
  if (!(scenario.noise_w > 0.0)) throw ConfigError("noise power must be > 0");
  if (scenario.serving_cell.size() != users) throw ConfigError("serving-cell map does not cover all users");
  if (config.powers_dbm.size() != cells) throw ConfigError("config powers do not match cell count");
  if (channel.gains.size() != users * cells || channel.cells != cells) {
    std::size_t idx = std::min(channel.gains.size(), users * cells - 1);
    throw ConfigError("missing gain entry for (" + scenario.user_ids.at(idx / cells) + ", " +
                      scenario.cell_ids.at(idx % cells) + ")");
  }

  std::vector<double> tx(cells, 0.0);
  for (std::size_t m = 0; m < cells; ++m) {
    if (scenario.cell_active(config, m)) tx[m] = config.power_w(m);
  }

  std::vector<double> sinr(users, 0.0);
  for (std::size_t k = 0; k < users; ++k) {
    const std::size_t serving = scenario.serving_cell[k];
    double interference = scenario.noise_w;
    for (std::size_t m = 0; m < cells; ++m) {
      if (m == serving) continue;
      interference += tx[m] * channel.gain(k, m);
    }
    sinr[k] = tx[serving] * channel.gain(k, serving) / interference;
  }
  return sinr;
}

std::vector<double> user_rates(const RanState& state, const ScenarioConfig& scenario) {
  std::vector<double> rates(scenario.users, 0.0);
  for (std::size_t k = 0; k < scenario.users; ++k) {
    const auto& rbs = state.config.rb_grants[k];
    double bandwidth = rbs.empty() ? scenario.bandwidth_hz[k]
                                   : static_cast<double>(rbs.size()) * scenario.rb_bandwidth_hz;
    rates[k] = bandwidth * std::log2(1.0 + state.interference.sinr[k]);
  }
  return rates;
}

KpiVector compute_kpis(const RanState& state, const ScenarioConfig& scenario) {
  KpiVector kpi;
  for (double r : user_rates(state, scenario)) kpi.throughput += r;
  kpi.latency = state.queues.total() / std::max(kpi.throughput, kRateFloor);
  for (std::size_t m = 0; m < scenario.cells; ++m) {
    if (scenario.cell_active(state.config, m)) kpi.energy += state.config.power_w(m);
  }
  for (bool on : state.config.carrier_active) {
    if (on) kpi.energy += scenario.static_carrier_w;
  }
  return kpi;
}

void refresh_interference(RanState& state, const ScenarioConfig& scenario) {
  state.interference.sinr = compute_sinr(state.channel, state.config, scenario);
}

RanState initial_state(const ScenarioConfig& scenario) {
  RanState s;
  s.channel.users = scenario.users;
  s.channel.cells = scenario.cells;
  s.channel.gains = scenario.gains;
  s.channel.rx_antennas = scenario.rx_antennas;
  s.channel.tx_antennas = scenario.tx_antennas;
  s.channel.matrices = scenario.channel_matrices;
  s.queues.users = scenario.users;
  s.queues.flows = scenario.flows;
  s.queues.bits = scenario.initial.queue_bits;
  s.config.powers_dbm = scenario.initial.powers_dbm;
  s.config.carrier_active = scenario.initial.carrier_active;
  s.config.scheduler_weights = scenario.initial.scheduler_weights;
  s.config.rb_grants.assign(scenario.users, {});
  refresh_interference(s, scenario);
  return s;
}

ConfigState apply_delta(const ConfigState& config, const ConfigDelta& delta,
                        const ScenarioConfig& scenario) {
  ConfigState next = config;
  for (const auto& [cell, dbm] : delta.power_dbm) {
    if (cell >= scenario.cells) throw ConfigError("delta references unknown cell index " + std::to_string(cell));
    next.powers_dbm[cell] = dbm;
  }
  for (const auto& [carrier, on] : delta.carrier_active) {
    if (carrier >= scenario.carriers()) {
      throw ConfigError("delta references unknown carrier index " + std::to_string(carrier));
    }
    next.carrier_active[carrier] = on;
  }
  if (delta.scheduler_weights) {
    if (delta.scheduler_weights->size() != scenario.flows) {
      throw ConfigError("delta scheduler weights do not cover every flow");
    }
    next.scheduler_weights = *delta.scheduler_weights;
  }
  for (const auto& [user, rbs] : delta.rb_grants) {
    if (user >= scenario.users) throw ConfigError("delta references unknown user index " + std::to_string(user));
    std::vector<std::size_t> grant = rbs;
    std::sort(grant.begin(), grant.end());
    grant.erase(std::unique(grant.begin(), grant.end()), grant.end());
    for (auto rb : grant) {
      if (rb >= scenario.rb_ids.size()) throw ConfigError("delta references unknown rb index " + std::to_string(rb));
    }
    // An RB belongs to at most one user; re-granting moves it.
    for (std::size_t other = 0; other < next.rb_grants.size(); ++other) {
      if (other == user) continue;
      auto& held = next.rb_grants[other];
      std::erase_if(held, [&](std::size_t rb) { return std::binary_search(grant.begin(), grant.end(), rb); });
    }
    next.rb_grants[user] = std::move(grant);
  }
  return next;
}

namespace {

// Rayleigh block fading: |h|^2 ~ Exp(1) scaled by the mean gain. Seeded per
// (scenario seed, tick) so successor states are reproducible.
std::vector<double> redraw_gains(const ScenarioConfig& scenario, std::uint64_t tick) {
  std::mt19937_64 rng(scenario.seed ^ (tick * 0x9E3779B97F4A7C15ULL) ^ 0xD1B54A32D192ED03ULL);
  std::vector<double> gains(scenario.gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    gains[i] = scenario.gains[i] * -std::log1p(-u);
  }
  return gains;
}

}  // namespace

RanState step(const RanState& state, const ConfigDelta& delta, const ScenarioConfig& scenario) {
  RanState next = state;
  next.tick = state.tick + 1;
  next.config = apply_delta(state.config, delta, scenario);
  if (scenario.mode == EnvMode::kStochastic) next.channel.gains = redraw_gains(scenario, next.tick);
  refresh_interference(next, scenario);

  if (scenario.mode != EnvMode::kConfigResponse) {
    const double dt = scenario.tick_seconds;
    const auto rates = user_rates(next, scenario);
    for (std::size_t k = 0; k < scenario.users; ++k) {
      for (std::size_t f = 0; f < scenario.flows; ++f) {
        const std::size_t i = k * scenario.flows + f;
        const double arrived = scenario.arrival_rates[i] * dt;
        const double served = next.config.scheduler_weights[f] * rates[k] * dt;
        next.queues.bits[i] = std::max(0.0, state.queues.bits[i] + arrived - served);
      }
    }
  }
  return next;
}

std::vector<std::string> check_invariants(const RanState& s, const ScenarioConfig& scenario) {
  std::vector<std::string> out;
  if (s.channel.gains.size() != scenario.users * scenario.cells) out.push_back("channel shape mismatch");
  for (double g : s.channel.gains) {
    if (!finite_nonneg(g)) {
      out.push_back("channel gain negative or non-finite");
      break;
    }
  }
  for (const auto& h : s.channel.matrices) {
    if (h.size() != s.channel.rx_antennas * s.channel.tx_antennas) {
      out.push_back("channel matrix shape mismatch");
      break;
    }
  }
  if (s.queues.users != scenario.users || s.queues.flows != scenario.flows ||
      s.queues.bits.size() != scenario.users * scenario.flows) {
    out.push_back("queue shape mismatch");
  }
  for (double q : s.queues.bits) {
    if (!finite_nonneg(q)) {
      out.push_back("queue length negative or non-finite");
      break;
    }
  }

  const auto& c = s.config;
  if (c.powers_dbm.size() != scenario.cells || c.carrier_active.size() != scenario.carriers() ||
      c.scheduler_weights.size() != scenario.flows || c.rb_grants.size() != scenario.users) {
    out.push_back("config shape mismatch");
    return out;
  }
  double total = 0.0;
  for (std::size_t m = 0; m < scenario.cells; ++m) {
    const double p = c.power_w(m);
    if (std::isnan(p) || p < scenario.p_min_w * (1.0 - kPowerSlack) ||
        p > scenario.p_max_cell_w * (1.0 + kPowerSlack)) {
      out.push_back("power of " + scenario.cell_ids[m] + " outside [P_min, P_max_cell]");
    }
    if (scenario.cell_active(c, m)) total += p;
  }
  if (!(total <= scenario.p_max_w * (1.0 + kPowerSlack))) out.push_back("total active power exceeds P_max");
  double wsum = 0.0;
  for (double w : c.scheduler_weights) {
    if (!(w >= 0.0 && w <= 1.0)) out.push_back("scheduler weight outside [0, 1]");
    wsum += w;
  }
  if (!(std::abs(wsum - 1.0) <= 1e-9)) out.push_back("scheduler weights do not sum to 1");
  std::set<std::size_t> granted;
  for (const auto& rbs : c.rb_grants) {
    for (auto rb : rbs) {
      if (rb >= scenario.rb_ids.size() || !granted.insert(rb).second) {
        out.push_back("rb grant invalid or shared");
      }
    }
  }

  if (s.interference.sinr.size() != scenario.users) {
    out.push_back("sinr shape mismatch");
  } else if (s.channel.gains.size() == scenario.users * scenario.cells &&
             s.interference.sinr != compute_sinr(s.channel, c, scenario)) {
    out.push_back("cached sinr inconsistent with channel and config");
  }
  return out;
}

}  // namespace ranop
