#include "ranop/norm.hpp"

#include <algorithm>
#include <cmath>

namespace ranop {

bool NormSpec::valid() const {
  // Zero weights drop a section; the result is then a pseudometric.
  auto ok = [](Section s) { return s.weight >= 0.0 && s.scale > 0.0 && std::isfinite(s.weight) && std::isfinite(s.scale); };
  return ok(channel) && ok(queues) && ok(powers) && ok(weights) && ok(sinr) && carriers >= 0.0 && rbs >= 0.0 &&
         std::isfinite(carriers) && std::isfinite(rbs);
}

namespace {

void same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ConfigError(std::string("state shape mismatch in ") + what);
}

double squares(const std::vector<double>& a, const std::vector<double>& b, double scale, const char* what) {
  same_size(a.size(), b.size(), what);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / scale;
    sum += d * d;
  }
  return sum;
}

}  // namespace

double state_distance(const RanState& a, const RanState& b, const NormSpec& norm) {
  double channel = squares(a.channel.gains, b.channel.gains, norm.channel.scale, "channel gains");
  same_size(a.channel.matrices.size(), b.channel.matrices.size(), "channel matrices");
  for (std::size_t k = 0; k < a.channel.matrices.size(); ++k) {
    same_size(a.channel.matrices[k].size(), b.channel.matrices[k].size(), "channel matrices");
    for (std::size_t i = 0; i < a.channel.matrices[k].size(); ++i) {
      const double d = std::abs(a.channel.matrices[k][i] - b.channel.matrices[k][i]) / norm.channel.scale;
      channel += d * d;
    }
  }

  same_size(a.config.powers_dbm.size(), b.config.powers_dbm.size(), "powers");
  double powers = 0.0;
  for (std::size_t m = 0; m < a.config.powers_dbm.size(); ++m) {
    const double d = (a.config.power_w(m) - b.config.power_w(m)) / norm.powers.scale;
    powers += d * d;
  }

  const double l2 = norm.channel.weight * channel +
                    norm.queues.weight * squares(a.queues.bits, b.queues.bits, norm.queues.scale, "queues") +
                    norm.powers.weight * powers +
                    norm.weights.weight * squares(a.config.scheduler_weights, b.config.scheduler_weights,
                                                  norm.weights.scale, "scheduler weights") +
                    norm.sinr.weight * squares(a.interference.sinr, b.interference.sinr, norm.sinr.scale, "sinr");

  same_size(a.config.carrier_active.size(), b.config.carrier_active.size(), "carriers");
  double carriers = 0.0;
  for (std::size_t c = 0; c < a.config.carrier_active.size(); ++c) {
    if (a.config.carrier_active[c] != b.config.carrier_active[c]) carriers += 1.0;
  }

  same_size(a.config.rb_grants.size(), b.config.rb_grants.size(), "rb grants");
  double rbs = 0.0;
  for (std::size_t k = 0; k < a.config.rb_grants.size(); ++k) {
    std::vector<std::size_t> x = a.config.rb_grants[k], y = b.config.rb_grants[k], diff;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::set_symmetric_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(diff));
    rbs += static_cast<double>(diff.size());
  }

  return std::sqrt(l2) + norm.carriers * carriers + norm.rbs * rbs;
}

}  // namespace ranop
