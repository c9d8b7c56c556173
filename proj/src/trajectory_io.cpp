#include "ranop/trajectory_io.hpp"

#include <istream>
#include <ostream>

namespace ranop {

using nlohmann::json;

json kpis_to_json(const KpiVector& kpis) {
  return {{"throughput", kpis.throughput}, {"latency", kpis.latency}, {"energy", kpis.energy}};
}

json record_to_json(const TrajectoryRecord& r) {
  const MessageBuckets b = bucket_messages(r.messages);
  json doc = {{"tick", r.tick},
              {"state_digest", r.state_digest},
              {"context_digest", r.context_digest},
              {"commands", r.commands},
              {"proposed", r.proposed},
              {"a1", b.a1},
              {"e2", b.e2},
              {"o1", b.o1},
              {"kpis", kpis_to_json(r.kpis)},
              {"utility", r.utility},
              {"residual", r.residual},
              {"tier", tier_name(r.tier)},
              {"objective", r.objective},
              {"audit", r.audit},
              {"verdict", r.verdict}};
  doc["decision_id"] = r.decision_id ? json(*r.decision_id) : json(nullptr);
  return doc;
}

InterfaceMessage message_from_json(const std::string& interface, const json& m) {
  if (interface == "a1") {
    A1PolicyMessage a1;
    a1.policy_id = m.at("policy_id").get<std::string>();
    a1.scope = m.at("scope").get<std::vector<std::string>>();
    for (const auto& flow : m.at("flow_order")) {
      const auto id = flow.get<std::string>();
      a1.weights.push_back({id, m.at("weights").at(id).get<double>()});
    }
    a1.issue_tick = m.at("issue_tick").get<std::uint64_t>();
    return a1;
  }
  if (interface == "e2") {
    E2ControlMessage e2;
    e2.target_cell = m.at("target_cell").get<std::string>();
    e2.issue_tick = m.at("issue_tick").get<std::uint64_t>();
    const auto parameter = m.at("parameter").get<std::string>();
    if (parameter == "tx_power_dbm") {
      e2.parameter = E2Parameter::kTxPowerDbm;
      e2.value = m.at("value").get<double>();
    } else if (parameter == "rb_assignment") {
      e2.parameter = E2Parameter::kRbAssignment;
      e2.value = RbAssignment{m.at("value").at("user").get<std::string>(),
                              m.at("value").at("rbs").get<std::vector<std::string>>()};
    } else {
      throw ConfigError("unknown e2 parameter '" + parameter + "'");
    }
    return e2;
  }
  if (interface == "o1") {
    return O1ConfigMessage{m.at("carrier").get<std::string>(), m.at("active").get<bool>(),
                           m.at("issue_tick").get<std::uint64_t>()};
  }
  throw ConfigError("unknown interface '" + interface + "'");
}

TrajectoryRecord record_from_json(const json& doc) {
  try {
    TrajectoryRecord r;
    r.tick = doc.at("tick").get<std::uint64_t>();
    r.state_digest = doc.at("state_digest").get<std::string>();
    r.context_digest = doc.at("context_digest").get<std::string>();
    r.commands = doc.at("commands").get<std::string>();
    r.proposed = doc.at("proposed").get<std::string>();
    for (const char* key : {"a1", "e2", "o1"}) {
      for (const auto& m : doc.at(key)) r.messages.push_back(message_from_json(key, m));
    }
    const auto& k = doc.at("kpis");
    r.kpis = {k.at("throughput").get<double>(), k.at("latency").get<double>(), k.at("energy").get<double>()};
    r.utility = doc.at("utility").get<double>();
    r.residual = doc.at("residual").get<double>();
    auto tier = tier_from_name(doc.at("tier").get<std::string>());
    if (!tier) throw ConfigError("unknown tier");
    r.tier = *tier;
    r.objective = doc.at("objective").get<std::string>();
    r.audit = doc.at("audit").get<std::vector<std::string>>();
    r.verdict = doc.at("verdict").get<std::vector<std::string>>();
    if (!doc.at("decision_id").is_null()) r.decision_id = doc.at("decision_id").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trajectory record: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, std::span<const TrajectoryRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<TrajectoryRecord> read_jsonl(std::istream& in) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("trajectory line is not JSON");
    out.push_back(record_from_json(doc));
  }
  return out;
}

}  // namespace ranop
