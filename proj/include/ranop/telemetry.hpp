#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ranop/env.hpp"

namespace ranop {

struct ClipRange {
  double min = 0.0;
  double max = 0.0;
};

// Rounding and clipping per field class. Numbers are clipped first, then
// rounded to `decimals` places.
struct QuantizationSpec {
  int gain_decimals = 2;
  int sinr_db_decimals = 1;
  int queue_decimals = 0;
  int power_dbm_decimals = 1;

  ClipRange gain_clip{-250.0, 50.0};  // dB
  ClipRange sinr_db_clip{-30.0, 60.0};
  ClipRange queue_clip{0.0, 1e9};
  ClipRange power_dbm_clip{-50.0, 60.0};

  bool valid() const;
};

// Section order: <STATE> <CSI> gains in dB </CSI> <QUEUES> bits </QUEUES>
// <CONFIG> cell_i=<p>dBm ... carrier_j=on|off ... </CONFIG> <SINR> dB </SINR>
// </STATE>.
struct StateContext {
  std::vector<std::string> tokens;
  std::uint64_t source_tick = 0;
  std::string digest;

  std::string text() const;  // tokens joined by single spaces
};

// Clip-then-round rendering with exactly `decimals` fractional digits.
std::string quantize(double value, int decimals, ClipRange clip);

StateContext tokenize_state(const RanState& state, const ScenarioConfig& scenario,
                            const QuantizationSpec& spec = {});

// True when the markers are present, properly nested and in the fixed order.
bool well_framed(const std::vector<std::string>& tokens);

// 64-bit FNV-1a over the token sequence, as 16 lowercase hex digits.
std::string digest(const StateContext& context);
std::string digest_tokens(std::span<const std::string> tokens);

// Exact-value digest of a state (tick excluded), for trajectory audit trails.
std::string state_digest(const RanState& state);

struct KpiAggregate {
  bool empty = true;
  std::size_t count = 0;
  KpiVector mean;
  KpiVector min;
  KpiVector max;
};

// Aggregates the trailing `window` entries; shorter histories use all.
KpiAggregate kpi_summary(std::span<const KpiVector> history, std::size_t window);

}  // namespace ranop
