#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "ranop/policy.hpp"

namespace ranop {

std::string intent_preamble(const Intent& intent) {
  const WeightVector w = weights_for(intent);
  std::ostringstream os;
  os << "You operate a radio access network. Objective: " << objective_name(intent.objective) << " with KPI weights ["
     << w[0] << ", " << w[1] << ", " << w[2] << "] over [throughput, latency, energy].";
  for (const auto& c : intent.constraints) {
    os << " Keep " << kpi_name(c.metric) << (c.comparator == Comparator::kAtMost ? " <= " : " >= ") << c.value << '.';
  }
  if (!intent.scope.cells.empty()) {
    os << " Only touch cells:";
    for (const auto& cell : intent.scope.cells) os << ' ' << cell;
    os << '.';
  }
  os << " Answer with commands between <ACTION> and </ACTION>, separated by ';'. Allowed: set_power, assign_rbs,"
        " set_scheduler_weights, set_carrier, noop.";
  return os.str();
}

Program interpret_reply(std::string_view reply, const ValidationScope& scope, std::vector<std::string>& log) {
  const std::string raw(reply.substr(0, 512));
  auto framed = extract_action(reply);
  if (!framed) {
    log.push_back("framing: " + framed.error().message + " | reply: " + raw);
    return Program{Noop{}};
  }
  auto program = parse_program(*framed);
  if (!program) {
    log.push_back("parse: " + program.error().describe() + " | reply: " + raw);
    return Program{Noop{}};
  }
  const Verdict verdict = validate(*program, scope);
  if (!verdict.accepted) {
    std::string reasons;
    for (const auto& r : verdict.describe()) reasons += (reasons.empty() ? "" : "; ") + r;
    log.push_back("verdict: " + reasons + " | reply: " + raw);
    return Program{Noop{}};
  }
  return std::move(*program);
}

Program ExternalPolicy::decide(const DecisionInput& in) {
  nlohmann::json body = {{"preamble", intent_preamble(in.intent)}, {"context", in.context.tokens}};
  httplib::Client client(endpoint_.host, endpoint_.port);
  const auto sec = endpoint_.timeout_ms / 1000;
  const auto usec = (endpoint_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  auto res = client.Post(endpoint_.route, body.dump(), "application/json");
  if (!res) {
    log_.push_back("transport: " + httplib::to_string(res.error()));
    return Program{Noop{}};
  }
  if (res->status != 200) {
    log_.push_back("transport: status " + std::to_string(res->status));
    return Program{Noop{}};
  }
  if (res->body.size() > endpoint_.max_reply_bytes) {
    log_.push_back("transport: reply of " + std::to_string(res->body.size()) + " bytes exceeds limit");
    return Program{Noop{}};
  }
  std::string text = res->body;
  auto doc = nlohmann::json::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_object() && doc.contains("text") && doc["text"].is_string()) {
    text = doc["text"].get<std::string>();
  }
  return interpret_reply(text, make_scope(in.scenario, in.state.config), log_);
}

std::vector<std::string> ExternalPolicy::drain_log() {
  std::vector<std::string> out;
  out.swap(log_);
  return out;
}

}  // namespace ranop
