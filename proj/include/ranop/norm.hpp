#pragma once

#include <cstdint>
#include <random>

#include "ranop/common.hpp"
#include "ranop/env.hpp"

namespace ranop {

// distance = sqrt(sum_c w_c * ||(a_c - b_c) / n_c||^2) + w_carriers * H(carriers)
//          + w_rbs * H(rb grants)
// over the continuous sections c in {channel, queues, powers (W), weights,
// sinr}. H counts differing flags; for RB grants each (user, rb) membership
// is one flag. Tick is not part of the distance.
struct NormSpec {
  struct Section {
    double weight = 1.0;
    double scale = 1.0;
  };
  Section channel;
  Section queues;
  Section powers;
  Section weights;
  Section sinr;
  double carriers = 1.0;
  double rbs = 1.0;

  bool valid() const;
};

// Throws ConfigError on shape mismatch.
double state_distance(const RanState& a, const RanState& b, const NormSpec& norm = {});

// k-hat = max over seeded random pairs of d(F(s1), F(s2)) / d(s1, s2),
// skipping pairs closer than `min_distance`. `sample(rng)` draws one state.
template <class S, class Map, class Sampler, class Distance>
double estimate_lipschitz(Map&& map, Sampler&& sample, Distance&& distance, std::size_t pairs, std::uint64_t seed,
                          double min_distance = 1e-12) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const S s1 = sample(rng);
    const S s2 = sample(rng);
    const double d = distance(s1, s2);
    if (!(d >= min_distance)) continue;
    const double ratio = distance(map(s1), map(s2)) / d;
    if (used == 0 || ratio > best) best = ratio;
    ++used;
  }
  if (used == 0) throw ConfigError("all sampled state pairs are degenerate");
  return best;
}

template <class Map, class Sampler>
double estimate_lipschitz(Map&& map, Sampler&& sample, const NormSpec& norm, std::size_t pairs,
                          std::uint64_t seed) {
  return estimate_lipschitz<RanState>(
      std::forward<Map>(map), std::forward<Sampler>(sample),
      [&norm](const RanState& a, const RanState& b) { return state_distance(a, b, norm); }, pairs, seed);
}

}  // namespace ranop
