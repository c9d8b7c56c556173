#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ranop/common.hpp"
#include "ranop/env.hpp"

namespace ranop::testing {

// Seeded config-response scenario with up to `max_cells` cells and
// `max_users` users. Users are served by their strongest cell.
inline ScenarioConfig random_scenario(std::uint64_t seed, std::size_t max_cells = 4, std::size_t max_users = 8,
                                      EnvMode mode = EnvMode::kConfigResponse) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> log_gain(-12.0, -8.0);

  ScenarioConfig s;
  s.cells = pick(1, max_cells);
  s.users = pick(1, max_users);
  s.flows = pick(1, 2);
  s.gains.resize(s.users * s.cells);
  for (double& g : s.gains) g = std::pow(10.0, log_gain(rng));
  for (std::size_t k = 0; k < s.users; ++k) {
    auto row = s.gains.begin() + static_cast<std::ptrdiff_t>(k * s.cells);
    s.serving_cell.push_back(static_cast<std::size_t>(std::max_element(row, row + s.cells) - row));
  }
  s.noise_w = 1e-12;
  s.p_max_cell_w = 20.0;
  s.p_max_w = 40.0;
  s.p_min_w = 0.0;
  s.static_carrier_w = 1.0;
  s.bandwidth_hz.assign(s.users, 5e6);
  s.arrival_rates.assign(s.users * s.flows, 1e5);
  s.mode = mode;
  s.seed = seed;
  s.initial.queue_bits.assign(s.users * s.flows, 0.0);
  for (std::size_t i = 0; i < s.initial.queue_bits.size(); ++i) {
    s.initial.queue_bits[i] = static_cast<double>(pick(0, 50000));
  }
  std::uniform_real_distribution<double> dbm(20.0, 40.0);
  for (std::size_t m = 0; m < s.cells; ++m) s.initial.powers_dbm.push_back(dbm(rng));
  double total = 0.0;
  for (double p : s.initial.powers_dbm) total += dbm_to_watts(p);
  if (total > s.p_max_w) {
    for (double& p : s.initial.powers_dbm) p = watts_to_dbm(dbm_to_watts(p) * s.p_max_w / total * 0.999);
  }
  finalize_scenario(s);
  return s;
}

// Two cells, two users, one flow, gains chosen for easy hand arithmetic.
inline ScenarioConfig two_by_two() {
  ScenarioConfig s;
  s.cells = 2;
  s.users = 2;
  s.flows = 1;
  s.gains = {1e-9, 1e-10,    // user_1: cell_1, cell_2
             2e-10, 4e-9};   // user_2
  s.serving_cell = {0, 1};
  s.noise_w = 1e-12;
  s.p_max_cell_w = 20.0;
  s.p_max_w = 40.0;
  s.bandwidth_hz = {1e6, 2e6};
  s.arrival_rates = {1e5, 2e5};
  s.static_carrier_w = 0.5;
  s.initial.powers_dbm = {30.0, 40.0};  // 1 W, 10 W
  s.initial.queue_bits = {1000.0, 3000.0};
  finalize_scenario(s);
  return s;
}

// Single cell, single user: SINR is linear in the cell power.
inline ScenarioConfig scalar_scenario(double initial_dbm = 40.0) {
  ScenarioConfig s;
  s.gains = {1e-10};
  s.noise_w = 1e-12;
  s.p_max_cell_w = 20.0;
  s.p_max_w = 40.0;
  s.bandwidth_hz = {10e6};
  s.initial.powers_dbm = {initial_dbm};
  finalize_scenario(s);
  return s;
}

}  // namespace ranop::testing
