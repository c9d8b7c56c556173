#include "ranop/telemetry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "ranop/common.hpp"

namespace ranop {

bool QuantizationSpec::valid() const {
  auto ok = [](ClipRange r) { return std::isfinite(r.min) && std::isfinite(r.max) && r.min < r.max; };
  return gain_decimals >= 0 && sinr_db_decimals >= 0 && queue_decimals >= 0 && power_dbm_decimals >= 0 &&
         gain_decimals <= 9 && sinr_db_decimals <= 9 && queue_decimals <= 9 && power_dbm_decimals <= 9 &&
         ok(gain_clip) && ok(sinr_db_clip) && ok(queue_clip) && ok(power_dbm_clip);
}

std::string StateContext::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string quantize(double value, int decimals, ClipRange clip) {
  double x = std::isnan(value) ? clip.min : std::clamp(value, clip.min, clip.max);
  const long long n = std::llround(x * std::pow(10.0, decimals));
  std::string digits = std::to_string(n < 0 ? -n : n);
  if (decimals > 0) {
    if (digits.size() <= static_cast<std::size_t>(decimals)) {
      digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(decimals), 1, '.');
  }
  return n < 0 ? "-" + digits : digits;
}

StateContext tokenize_state(const RanState& state, const ScenarioConfig& scenario, const QuantizationSpec& spec) {
  StateContext ctx;
  ctx.source_tick = state.tick;
  auto& t = ctx.tokens;
  t.reserve(state.channel.gains.size() + state.queues.bits.size() + scenario.cells + scenario.carriers() +
            state.interference.sinr.size() + 10);

  t.emplace_back("<STATE>");
  t.emplace_back("<CSI>");
  for (double g : state.channel.gains) t.push_back(quantize(linear_to_db(g), spec.gain_decimals, spec.gain_clip));
  t.emplace_back("</CSI>");

  t.emplace_back("<QUEUES>");
  for (double q : state.queues.bits) t.push_back(quantize(q, spec.queue_decimals, spec.queue_clip));
  t.emplace_back("</QUEUES>");

  t.emplace_back("<CONFIG>");
  for (std::size_t m = 0; m < state.config.powers_dbm.size(); ++m) {
    t.push_back(scenario.cell_ids[m] + "=" +
                quantize(state.config.powers_dbm[m], spec.power_dbm_decimals, spec.power_dbm_clip) + "dBm");
  }
  for (std::size_t c = 0; c < state.config.carrier_active.size(); ++c) {
    t.push_back(scenario.carrier_ids[c] + (state.config.carrier_active[c] ? "=on" : "=off"));
  }
  t.emplace_back("</CONFIG>");

  t.emplace_back("<SINR>");
  for (double s : state.interference.sinr) {
    t.push_back(quantize(linear_to_db(s), spec.sinr_db_decimals, spec.sinr_db_clip));
  }
  t.emplace_back("</SINR>");
  t.emplace_back("</STATE>");

  ctx.digest = digest(ctx);
  return ctx;
}

bool well_framed(const std::vector<std::string>& tokens) {
  static const char* kSections[] = {"CSI", "QUEUES", "CONFIG", "SINR"};
  if (tokens.size() < 10 || tokens.front() != "<STATE>" || tokens.back() != "</STATE>") return false;
  std::size_t section = 0;
  bool open = false;
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (tok.empty() || tok[0] != '<') {
      if (!open) return false;
      continue;
    }
    if (section >= 4) return false;
    const std::string name = kSections[section];
    if (!open && tok == "<" + name + ">") {
      open = true;
    } else if (open && tok == "</" + name + ">") {
      open = false;
      ++section;
    } else {
      return false;
    }
  }
  return section == 4 && !open;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    unsigned char b = static_cast<unsigned char>(v >> (8 * i));
    fnv(h, &b, 1);
  }
}

void fnv_doubles(std::uint64_t& h, const std::vector<double>& xs) {
  fnv_u64(h, xs.size());
  for (double x : xs) fnv_u64(h, std::bit_cast<std::uint64_t>(x));
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string digest_tokens(std::span<const std::string> tokens) {
  std::uint64_t h = kFnvOffset;
  for (const auto& tok : tokens) {
    fnv(h, tok.data(), tok.size());
    const char sep = '\x1f';
    fnv(h, &sep, 1);
  }
  return hex(h);
}

std::string digest(const StateContext& context) { return digest_tokens(context.tokens); }

std::string state_digest(const RanState& s) {
  std::uint64_t h = kFnvOffset;
  fnv_doubles(h, s.channel.gains);
  fnv_u64(h, s.channel.rx_antennas);
  fnv_u64(h, s.channel.tx_antennas);
  for (const auto& m : s.channel.matrices) {
    fnv_u64(h, m.size());
    for (const auto& z : m) {
      fnv_u64(h, std::bit_cast<std::uint64_t>(z.real()));
      fnv_u64(h, std::bit_cast<std::uint64_t>(z.imag()));
    }
  }
  fnv_doubles(h, s.queues.bits);
  fnv_doubles(h, s.config.powers_dbm);
  fnv_u64(h, s.config.carrier_active.size());
  for (bool on : s.config.carrier_active) fnv_u64(h, on ? 1 : 0);
  fnv_doubles(h, s.config.scheduler_weights);
  for (const auto& rbs : s.config.rb_grants) {
    fnv_u64(h, rbs.size());
    for (auto rb : rbs) fnv_u64(h, rb);
  }
  fnv_doubles(h, s.interference.sinr);
  return hex(h);
}

KpiAggregate kpi_summary(std::span<const KpiVector> history, std::size_t window) {
  KpiAggregate agg;
  if (history.empty() || window == 0) return agg;
  const std::size_t n = std::min(window, history.size());
  auto tail = history.subspan(history.size() - n);
  agg.empty = false;
  agg.count = n;
  agg.min = agg.max = tail.front();
  KpiVector sum;
  for (const auto& k : tail) {
    sum.throughput += k.throughput;
    sum.latency += k.latency;
    sum.energy += k.energy;
    agg.min.throughput = std::min(agg.min.throughput, k.throughput);
    agg.min.latency = std::min(agg.min.latency, k.latency);
    agg.min.energy = std::min(agg.min.energy, k.energy);
    agg.max.throughput = std::max(agg.max.throughput, k.throughput);
    agg.max.latency = std::max(agg.max.latency, k.latency);
    agg.max.energy = std::max(agg.max.energy, k.energy);
  }
  const double d = static_cast<double>(n);
  agg.mean = {sum.throughput / d, sum.latency / d, sum.energy / d};
  return agg;
}

}  // namespace ranop
