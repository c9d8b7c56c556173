#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ranop {

// Channel, queue, configuration and interference sections of the RAN state.
// Matrices are row-major: gains are (user, cell), queues are (user, flow).

struct ChannelState {
  std::size_t users = 0;
  std::size_t cells = 0;
  std::vector<double> gains;  // linear power gain, users x cells

  // Optional per-user MIMO form; each entry holds rx_antennas * tx_antennas
  // values. Carried structurally; SINR uses the scalar gains.
  std::size_t rx_antennas = 1;
  std::size_t tx_antennas = 1;
  std::vector<std::vector<std::complex<double>>> matrices;

  double gain(std::size_t user, std::size_t cell) const { return gains[user * cells + cell]; }
  bool operator==(const ChannelState&) const = default;
};

struct QueueState {
  std::size_t users = 0;
  std::size_t flows = 0;
  std::vector<double> bits;  // users x flows

  double at(std::size_t user, std::size_t flow) const { return bits[user * flows + flow]; }
  double total() const;
  bool operator==(const QueueState&) const = default;
};

struct ConfigState {
  std::vector<double> powers_dbm;      // per cell; -inf encodes 0 W
  std::vector<bool> carrier_active;    // per carrier
  std::vector<double> scheduler_weights;  // per flow
  std::vector<std::vector<std::size_t>> rb_grants;  // per user, sorted RB indices

  double power_w(std::size_t cell) const;
  bool operator==(const ConfigState&) const = default;
};

struct InterferenceState {
  std::vector<double> sinr;  // linear, per user

  double sinr_db(std::size_t user) const;
  bool operator==(const InterferenceState&) const = default;
};

// One tick is one near-RT scheduling interval. The tick counter is not part
// of state identity.
struct RanState {
  ChannelState channel;
  QueueState queues;
  ConfigState config;
  InterferenceState interference;
  std::uint64_t tick = 0;

  friend bool operator==(const RanState& a, const RanState& b) {
    return a.channel == b.channel && a.queues == b.queues && a.config == b.config &&
           a.interference == b.interference;
  }
};

enum class Kpi { kThroughput = 0, kLatency = 1, kEnergy = 2 };

struct KpiVector {
  double throughput = 0.0;  // bit/s
  double latency = 0.0;     // s
  double energy = 0.0;      // W

  std::array<double, 3> as_array() const { return {throughput, latency, energy}; }
  double get(Kpi k) const;
  bool operator==(const KpiVector&) const = default;
};

const char* kpi_name(Kpi k);
std::optional<Kpi> kpi_from_name(std::string_view name);

enum class EnvMode { kConfigResponse, kQuasiStatic, kStochastic };

const char* mode_name(EnvMode mode);
std::optional<EnvMode> mode_from_name(std::string_view name);

struct InitialConfig {
  std::vector<double> powers_dbm;
  std::vector<bool> carrier_active;
  std::vector<double> scheduler_weights;
  std::vector<double> queue_bits;  // users x flows
};

struct ScenarioConfig {
  std::size_t cells = 1;
  std::size_t users = 1;
  std::size_t flows = 1;

  std::vector<std::string> cell_ids;
  std::vector<std::string> user_ids;
  std::vector<std::string> flow_ids;
  std::vector<std::string> carrier_ids;
  std::vector<std::string> rb_ids;

  std::vector<std::size_t> cell_carrier;  // cell -> carrier index
  std::vector<std::size_t> serving_cell;  // user -> cell index

  std::vector<double> gains;  // mean linear gains, users x cells
  std::size_t rx_antennas = 1;
  std::size_t tx_antennas = 1;
  std::vector<std::vector<std::complex<double>>> channel_matrices;

  double noise_w = 1e-13;
  double p_max_w = 40.0;       // total over active cells
  double p_max_cell_w = 20.0;
  double p_min_w = 0.0;

  std::vector<double> arrival_rates;  // bit/s, users x flows
  std::vector<double> bandwidth_hz;   // per user, used when no RBs are granted
  double rb_bandwidth_hz = 180e3;
  double static_carrier_w = 0.0;
  double tick_seconds = 0.01;

  EnvMode mode = EnvMode::kConfigResponse;
  std::uint64_t seed = 0;

  InitialConfig initial;

  std::size_t carriers() const { return carrier_ids.size(); }
  bool cell_active(const ConfigState& config, std::size_t cell) const {
    return config.carrier_active[cell_carrier[cell]];
  }
};

// Applied to a ConfigState by step(). Later writers to the same target win
// before the delta reaches the environment.
struct ConfigDelta {
  std::map<std::size_t, double> power_dbm;
  std::optional<std::vector<double>> scheduler_weights;
  std::map<std::size_t, bool> carrier_active;
  std::map<std::size_t, std::vector<std::size_t>> rb_grants;

  bool empty() const {
    return power_dbm.empty() && !scheduler_weights && carrier_active.empty() && rb_grants.empty();
  }
};

// Floor on the service rate used by the latency proxy.
inline constexpr double kRateFloor = 1e-9;

// Fills default ids, serving map and carrier map, then checks every
// invariant. Throws ScenarioError.
void finalize_scenario(ScenarioConfig& scenario);

std::vector<double> compute_sinr(const ChannelState& channel, const ConfigState& config,
                                 const ScenarioConfig& scenario);

// Shannon rate per user, bandwidth_k * log2(1 + sinr_k).
std::vector<double> user_rates(const RanState& state, const ScenarioConfig& scenario);

KpiVector compute_kpis(const RanState& state, const ScenarioConfig& scenario);

RanState initial_state(const ScenarioConfig& scenario);

// Rebuilds the cached SINR section from channel and config.
void refresh_interference(RanState& state, const ScenarioConfig& scenario);

ConfigState apply_delta(const ConfigState& config, const ConfigDelta& delta,
                        const ScenarioConfig& scenario);

RanState step(const RanState& state, const ConfigDelta& delta, const ScenarioConfig& scenario);

// Empty when all state invariants hold; otherwise one message per violation.
std::vector<std::string> check_invariants(const RanState& state, const ScenarioConfig& scenario);

}  // namespace ranop
