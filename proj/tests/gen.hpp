#pragma once

#include <random>
#include <string>
#include <vector>

#include "ranop/dsl.hpp"

namespace ranop::testing {

inline std::string random_identifier(std::mt19937_64& rng) {
  static const char* kPrefixes[] = {"cell_", "user_", "rb_", "flow_", "carrier_", "x"};
  std::uniform_int_distribution<int> prefix(0, 5);
  std::uniform_int_distribution<int> num(0, 40);
  return std::string(kPrefixes[prefix(rng)]) + std::to_string(num(rng));
}

inline double random_number(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 4);
  switch (kind(rng)) {
    case 0: return 0.0;
    case 1: return std::uniform_int_distribution<int>(-60, 60)(rng);
    case 2: return std::uniform_real_distribution<double>(-100.0, 100.0)(rng);
    case 3: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng),
                              std::uniform_int_distribution<int>(-60, 60)(rng));
    default: return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
}

inline Command random_command(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> count(1, 4);
  switch (kind(rng)) {
    case 0: {
      SetPower c;
      for (int i = count(rng); i > 0; --i) c.settings.push_back({random_identifier(rng), random_number(rng)});
      return c;
    }
    case 1: {
      AssignRbs c;
      for (int i = count(rng); i > 0; --i) {
        RbGrant g{random_identifier(rng), {}};
        for (int j = count(rng); j > 0; --j) g.rbs.push_back(random_identifier(rng));
        c.grants.push_back(std::move(g));
      }
      return c;
    }
    case 2: {
      SetSchedulerWeights c;
      for (int i = count(rng); i > 0; --i) {
        c.weights.push_back({random_identifier(rng), std::abs(random_number(rng))});
      }
      return c;
    }
    case 3: return SetCarrier{random_identifier(rng), std::bernoulli_distribution(0.5)(rng)};
    default: return Noop{};
  }
}

inline Program random_program(std::mt19937_64& rng) {
  Program p;
  for (int i = std::uniform_int_distribution<int>(1, 5)(rng); i > 0; --i) p.push_back(random_command(rng));
  return p;
}

// Mix of raw bytes, token soup and mutated valid programs.
inline std::string fuzz_input(std::mt19937_64& rng, int i) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 200);
  switch (i % 3) {
    case 0: {
      std::string s(static_cast<std::size_t>(len(rng)), '\0');
      for (char& c : s) c = static_cast<char>(byte(rng));
      return s;
    }
    case 1: {
      static const char* kTokens[] = {"set_power", "assign_rbs", "set_scheduler_weights", "set_scheduler",
                                      "set_carrier", "noop", "(", ")", "[", "]", "=", ",", ";", "dBm",
                                      "on", "off", "weights", "cell_1", "-10", "0.5", "1e400", " ", "\n"};
      std::uniform_int_distribution<int> tok(0, 22);
      std::string s;
      for (int n = len(rng) / 4; n > 0; --n) s += kTokens[tok(rng)];
      return s;
    }
    default: {
      std::string s = print_program(random_program(rng));
      if (s.empty()) return s;
      std::uniform_int_distribution<std::size_t> at(0, s.size() - 1);
      for (int n = std::uniform_int_distribution<int>(1, 3)(rng); n > 0; --n) {
        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
          case 0: s[at(rng)] = static_cast<char>(byte(rng)); break;
          case 1: s.erase(at(rng), 1); break;
          default: s.insert(at(rng), 1, static_cast<char>(byte(rng))); break;
        }
        if (s.empty()) break;
        at = std::uniform_int_distribution<std::size_t>(0, s.size() - 1);
      }
      return s;
    }
  }
}

}  // namespace ranop::testing
