#include "ranop/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace ranop {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct ParseFailure {
  ParseError error;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Program program() {
    Program out;
    out.push_back(command());
    while (true) {
      skip_ws();
      if (pos_ == src_.size()) break;
      if (src_[pos_] != ';') fail(pos_, {"\";\"", "end of input"}, "unexpected character after command");
      ++pos_;
      out.push_back(command());
    }
    return out;
  }

 private:
  [[noreturn]] void fail(std::size_t at, std::vector<std::string> expected, std::string message) {
    throw ParseFailure{ParseError{at, std::move(expected), std::move(message)}};
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool try_char(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_char(char c) {
    if (!try_char(c)) fail(pos_, {std::string("\"") + c + "\""}, "unexpected input");
  }

  std::string identifier(const char* role) {
    skip_ws();
    if (pos_ >= src_.size() || !ident_start(src_[pos_])) fail(pos_, {role}, "expected identifier");
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  double number(bool allow_sign, std::size_t& start) {
    skip_ws();
    start = pos_;
    std::size_t i = pos_;
    bool negative = false;
    if (allow_sign && i < src_.size() && (src_[i] == '-' || src_[i] == '+')) {
      negative = src_[i] == '-';
      ++i;
    }
    const std::size_t mantissa = i;
    std::size_t digits = 0;
    while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) ++i, ++digits;
    if (i < src_.size() && src_[i] == '.') {
      ++i;
      while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) ++i, ++digits;
    }
    if (digits == 0) fail(start, {allow_sign ? "signed number" : "number"}, "expected number");
    if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      std::size_t exp_digits = 0;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j, ++exp_digits;
      if (exp_digits > 0) i = j;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + mantissa, src_.data() + i, value);
    if (ec != std::errc() || ptr != src_.data() + i || !std::isfinite(value)) {
      fail(start, {"finite number"}, "number out of range");
    }
    pos_ = i;
    return negative ? -value : value;
  }

  void unit_dbm(std::size_t literal_start) {
    skip_ws();
    if (src_.substr(pos_, 3) == "dBm" && (pos_ + 3 == src_.size() || !ident_char(src_[pos_ + 3]))) {
      pos_ += 3;
      return;
    }
    fail(literal_start, {"\"dBm\""}, "power literal requires a dBm unit suffix");
  }

  Command command() {
    skip_ws();
    const std::size_t head_at = pos_;
    if (pos_ >= src_.size() || !ident_start(src_[pos_])) {
      fail(pos_, {"command"}, pos_ >= src_.size() ? "unexpected end of input" : "expected command name");
    }
    const std::string head = identifier("command");
    expect_char('(');
    if (head == "noop") {
      expect_char(')');
      return Noop{};
    }
    if (head == "set_power") return set_power();
    if (head == "assign_rbs") return assign_rbs();
    if (head == "set_scheduler_weights") return set_scheduler_weights();
    if (head == "set_scheduler") return set_scheduler_alias();
    if (head == "set_carrier") return set_carrier();
    fail(head_at,
         {"set_power", "assign_rbs", "set_scheduler_weights", "set_scheduler", "set_carrier", "noop"},
         "command '" + head + "' is not in the allow-list");
  }

  Command set_power() {
    SetPower cmd;
    do {
      PowerSetting s;
      s.cell = identifier("cell id");
      if (!try_char('=') && !try_char(',')) fail(pos_, {"\"=\"", "\",\""}, "expected pair separator");
      std::size_t at = 0;
      s.dbm = number(true, at);
      unit_dbm(at);
      cmd.settings.push_back(std::move(s));
    } while (try_char(','));
    expect_char(')');
    return cmd;
  }

  Command assign_rbs() {
    AssignRbs cmd;
    do {
      RbGrant g;
      g.user = identifier("user id");
      expect_char('=');
      expect_char('[');
      do {
        g.rbs.push_back(identifier("rb id"));
      } while (try_char(','));
      expect_char(']');
      cmd.grants.push_back(std::move(g));
    } while (try_char(','));
    expect_char(')');
    return cmd;
  }

  Command set_scheduler_weights() {
    SetSchedulerWeights cmd;
    do {
      FlowWeight w;
      w.flow = identifier("flow id");
      expect_char('=');
      std::size_t at = 0;
      w.weight = number(false, at);
      cmd.weights.push_back(std::move(w));
    } while (try_char(','));
    expect_char(')');
    return cmd;
  }

  Command set_scheduler_alias() {
    const std::size_t at = (skip_ws(), pos_);
    if (identifier("\"weights\"") != "weights") fail(at, {"\"weights\""}, "expected weights=[...]");
    expect_char('=');
    expect_char('[');
    SetSchedulerWeights cmd;
    do {
      std::size_t num_at = 0;
      double w = number(false, num_at);
      cmd.weights.push_back({"flow_" + std::to_string(cmd.weights.size()), w});
    } while (try_char(','));
    expect_char(']');
    expect_char(')');
    return cmd;
  }

  Command set_carrier() {
    SetCarrier cmd;
    cmd.carrier = identifier("carrier id");
    expect_char(',');
    const std::size_t at = (skip_ws(), pos_);
    const std::string state = identifier("\"on\" or \"off\"");
    if (state == "on") {
      cmd.on = true;
    } else if (state == "off") {
      cmd.on = false;
    } else {
      fail(at, {"\"on\"", "\"off\""}, "carrier state must be on or off");
    }
    expect_char(')');
    return cmd;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

std::string ParseError::describe() const {
  std::ostringstream os;
  os << "parse error at byte " << offset << ": " << message;
  if (!expected.empty()) {
    os << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? " | " : "") << expected[i];
    os << ")";
  }
  return os.str();
}

Expected<Program, ParseError> parse_program(std::string_view text) {
  if (text.size() > kMaxProgramBytes) {
    return unexpected(ParseError{kMaxProgramBytes, {}, "input exceeds 65536 bytes"});
  }
  try {
    return Parser(text).program();
  } catch (ParseFailure& f) {
    return unexpected(std::move(f.error));
  }
}

const char* command_name(const Command& command) {
  struct V {
    const char* operator()(const SetPower&) const { return "set_power"; }
    const char* operator()(const AssignRbs&) const { return "assign_rbs"; }
    const char* operator()(const SetSchedulerWeights&) const { return "set_scheduler_weights"; }
    const char* operator()(const SetCarrier&) const { return "set_carrier"; }
    const char* operator()(const Noop&) const { return "noop"; }
  };
  return std::visit(V{}, command);
}

std::string print_command(const Command& command) {
  std::string out = command_name(command);
  out += '(';
  struct V {
    std::string& out;
    void operator()(const SetPower& c) const {
      for (std::size_t i = 0; i < c.settings.size(); ++i) {
        if (i) out += ", ";
        out += c.settings[i].cell + "=" + format_number(c.settings[i].dbm) + "dBm";
      }
    }
    void operator()(const AssignRbs& c) const {
      for (std::size_t i = 0; i < c.grants.size(); ++i) {
        if (i) out += ", ";
        out += c.grants[i].user + "=[";
        for (std::size_t j = 0; j < c.grants[i].rbs.size(); ++j) {
          if (j) out += ", ";
          out += c.grants[i].rbs[j];
        }
        out += "]";
      }
    }
    void operator()(const SetSchedulerWeights& c) const {
      for (std::size_t i = 0; i < c.weights.size(); ++i) {
        if (i) out += ", ";
        out += c.weights[i].flow + "=" + format_number(c.weights[i].weight);
      }
    }
    void operator()(const SetCarrier& c) const { out += c.carrier + (c.on ? ", on" : ", off"); }
    void operator()(const Noop&) const {}
  };
  std::visit(V{out}, command);
  out += ')';
  return out;
}

std::string print_program(std::span<const Command> program) {
  std::string out;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (i) out += "; ";
    out += print_command(program[i]);
  }
  return out;
}

bool is_valid_identifier(std::string_view id) {
  return !id.empty() && ident_start(id[0]) && std::all_of(id.begin(), id.end(), ident_char);
}

bool is_well_formed(const Command& command) {
  struct V {
    bool operator()(const SetPower& c) const {
      return !c.settings.empty() && std::all_of(c.settings.begin(), c.settings.end(), [](const auto& s) {
        return is_valid_identifier(s.cell) && std::isfinite(s.dbm);
      });
    }
    bool operator()(const AssignRbs& c) const {
      return !c.grants.empty() && std::all_of(c.grants.begin(), c.grants.end(), [](const auto& g) {
        return is_valid_identifier(g.user) && !g.rbs.empty() &&
               std::all_of(g.rbs.begin(), g.rbs.end(), [](const auto& rb) { return is_valid_identifier(rb); });
      });
    }
    bool operator()(const SetSchedulerWeights& c) const {
      return !c.weights.empty() && std::all_of(c.weights.begin(), c.weights.end(), [](const auto& w) {
        return is_valid_identifier(w.flow) && std::isfinite(w.weight) && !std::signbit(w.weight);
      });
    }
    bool operator()(const SetCarrier& c) const { return is_valid_identifier(c.carrier); }
    bool operator()(const Noop&) const { return true; }
  };
  return std::visit(V{}, command);
}

Expected<std::string, FramingError> extract_action(std::string_view text) {
  static constexpr std::string_view kOpen = "<ACTION>";
  static constexpr std::string_view kClose = "</ACTION>";
  const auto open = text.find(kOpen);
  const auto first_close = text.find(kClose);
  if (open == std::string_view::npos && first_close == std::string_view::npos) {
    return unexpected(FramingError{"no <ACTION> markers in reply"});
  }
  if (open == std::string_view::npos) return unexpected(FramingError{"</ACTION> without opening <ACTION>"});
  const auto body_start = open + kOpen.size();
  const auto close = text.find(kClose, body_start);
  if (close == std::string_view::npos) return unexpected(FramingError{"<ACTION> without closing </ACTION>"});
  if (first_close < open) return unexpected(FramingError{"</ACTION> precedes <ACTION>"});
  auto body = text.substr(body_start, close - body_start);
  if (body.find(kOpen) != std::string_view::npos) return unexpected(FramingError{"nested <ACTION> markers"});
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!body.empty() && is_space(body.front())) body.remove_prefix(1);
  while (!body.empty() && is_space(body.back())) body.remove_suffix(1);
  return std::string(body);
}

// ---- validation -------------------------------------------------------------

namespace {

std::optional<std::size_t> find_id(const std::vector<std::string>& ids, std::string_view id) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  return std::nullopt;
}

std::string watts(double w) {
  std::ostringstream os;
  os << w << " W";
  return os.str();
}

}  // namespace

std::optional<std::size_t> ValidationScope::cell_index(std::string_view id) const { return find_id(cells, id); }
std::optional<std::size_t> ValidationScope::user_index(std::string_view id) const { return find_id(users, id); }
std::optional<std::size_t> ValidationScope::rb_index(std::string_view id) const { return find_id(rbs, id); }
std::optional<std::size_t> ValidationScope::carrier_index(std::string_view id) const {
  return find_id(carriers, id);
}

std::optional<std::size_t> ValidationScope::flow_index(std::string_view id) const {
  if (auto i = find_id(flows, id)) return i;
  constexpr std::string_view kPrefix = "flow_";
  if (id.substr(0, kPrefix.size()) != kPrefix || id.size() == kPrefix.size() || id.size() > kPrefix.size() + 6) {
    return std::nullopt;
  }
  std::size_t i = 0;
  auto digits = id.substr(kPrefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || i >= flows.size()) return std::nullopt;
  return i;
}

ValidationScope make_scope(const ScenarioConfig& scenario, const ConfigState& config) {
  ValidationScope scope;
  scope.cells = scenario.cell_ids;
  scope.users = scenario.user_ids;
  scope.flows = scenario.flow_ids;
  scope.rbs = scenario.rb_ids;
  scope.carriers = scenario.carrier_ids;
  scope.cell_carrier = scenario.cell_carrier;
  scope.serving_cell = scenario.serving_cell;
  scope.current_powers_dbm = config.powers_dbm;
  scope.carrier_active = config.carrier_active;
  scope.p_min_w = scenario.p_min_w;
  scope.p_max_cell_w = scenario.p_max_cell_w;
  scope.p_max_w = scenario.p_max_w;
  return scope;
}

const char* rule_code(Rule rule) {
  switch (rule) {
    case Rule::kAllowList:
      return "a";
    case Rule::kUnknownId:
      return "b";
    case Rule::kPowerBounds:
      return "c";
    case Rule::kWeightSimplex:
      return "d";
    case Rule::kRbOverlap:
      return "e";
    case Rule::kDuplicateTarget:
      return "f";
  }
  return "?";
}

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::kAllowList:
      return "allow_list";
    case Rule::kUnknownId:
      return "unknown_id";
    case Rule::kPowerBounds:
      return "power_bounds";
    case Rule::kWeightSimplex:
      return "weight_simplex";
    case Rule::kRbOverlap:
      return "rb_overlap";
    case Rule::kDuplicateTarget:
      return "duplicate_target";
  }
  return "?";
}

bool Verdict::cites(Rule rule) const {
  return std::any_of(reasons.begin(), reasons.end(), [rule](const Violation& v) { return v.rule == rule; });
}

std::vector<std::string> Verdict::describe() const {
  std::vector<std::string> out;
  for (const auto& r : reasons) out.push_back(std::string(rule_code(r.rule)) + " " + rule_name(r.rule) + ": " + r.message);
  return out;
}

Verdict validate(std::span<const Command> program, const ValidationScope& scope) {
  Verdict verdict;
  auto reject = [&](Rule rule, std::string message) {
    verdict.accepted = false;
    verdict.reasons.push_back({rule, std::move(message)});
  };

  // Resulting configuration as far as the power budget is concerned.
  std::vector<double> powers = scope.current_powers_dbm;
  std::vector<bool> carriers = scope.carrier_active;
  bool budget_checkable = powers.size() == scope.cells.size() && carriers.size() == scope.carriers.size() &&
                          scope.cell_carrier.size() == scope.cells.size();

  std::set<std::size_t> cells_set, flows_set, carriers_set, users_set;
  std::vector<std::optional<std::size_t>> rb_owner(scope.rbs.size());

  for (const Command& command : program) {
    if (std::holds_alternative<SetPower>(command)) {
      for (const auto& s : std::get<SetPower>(command).settings) {
        auto cell = scope.cell_index(s.cell);
        if (!cell) {
          reject(Rule::kUnknownId, "unknown cell '" + s.cell + "'");
          budget_checkable = false;
          continue;
        }
        if (!cells_set.insert(*cell).second) reject(Rule::kDuplicateTarget, "cell '" + s.cell + "' set twice");
        const double w = dbm_to_watts(s.dbm);
        if (!(w >= scope.p_min_w * (1.0 - kPowerSlack) && w <= scope.p_max_cell_w * (1.0 + kPowerSlack))) {
          reject(Rule::kPowerBounds, "power " + watts(w) + " for '" + s.cell + "' outside [" + watts(scope.p_min_w) +
                                         ", " + watts(scope.p_max_cell_w) + "]");
        }
        if (budget_checkable) powers[*cell] = s.dbm;
      }
    } else if (std::holds_alternative<AssignRbs>(command)) {
      for (const auto& g : std::get<AssignRbs>(command).grants) {
        auto user = scope.user_index(g.user);
        if (!user) {
          reject(Rule::kUnknownId, "unknown user '" + g.user + "'");
          continue;
        }
        if (!users_set.insert(*user).second) reject(Rule::kDuplicateTarget, "user '" + g.user + "' assigned twice");
        std::set<std::size_t> own;
        for (const auto& rb_id : g.rbs) {
          auto rb = scope.rb_index(rb_id);
          if (!rb) {
            reject(Rule::kUnknownId, "unknown rb '" + rb_id + "'");
            continue;
          }
          if (!own.insert(*rb).second) {
            reject(Rule::kDuplicateTarget, "rb '" + rb_id + "' listed twice for '" + g.user + "'");
            continue;
          }
          if (rb_owner[*rb] && *rb_owner[*rb] != *user) {
            reject(Rule::kRbOverlap, "rb '" + rb_id + "' granted to more than one user");
          }
          rb_owner[*rb] = *user;
        }
      }
    } else if (std::holds_alternative<SetSchedulerWeights>(command)) {
      double sum = 0.0;
      for (const auto& w : std::get<SetSchedulerWeights>(command).weights) {
        auto flow = scope.flow_index(w.flow);
        if (!flow) {
          reject(Rule::kUnknownId, "unknown flow '" + w.flow + "'");
        } else if (!flows_set.insert(*flow).second) {
          reject(Rule::kDuplicateTarget, "flow '" + w.flow + "' weighted twice");
        }
        if (!(w.weight >= 0.0 && w.weight <= 1.0)) {
          reject(Rule::kWeightSimplex, "weight for '" + w.flow + "' outside [0, 1]");
        }
        sum += w.weight;
      }
      if (!(std::abs(sum - 1.0) <= scope.weight_tolerance)) {
        std::ostringstream os;
        os << "weights sum to " << sum << ", not 1";
        reject(Rule::kWeightSimplex, os.str());
      }
    } else if (std::holds_alternative<SetCarrier>(command)) {
      const auto& c = std::get<SetCarrier>(command);
      auto carrier = scope.carrier_index(c.carrier);
      if (!carrier) {
        reject(Rule::kUnknownId, "unknown carrier '" + c.carrier + "'");
        budget_checkable = false;
        continue;
      }
      if (!carriers_set.insert(*carrier).second) {
        reject(Rule::kDuplicateTarget, "carrier '" + c.carrier + "' switched twice");
      }
      if (budget_checkable) carriers[*carrier] = c.on;
    }
    // Noop: nothing to check. Every other head was refused by the parser or
    // cannot be represented, so rule (a) always holds for an AST.
  }

  if (budget_checkable) {
    double total = 0.0;
    for (std::size_t m = 0; m < powers.size(); ++m) {
      if (carriers[scope.cell_carrier[m]]) total += dbm_to_watts(powers[m]);
    }
    if (!(total <= scope.p_max_w * (1.0 + kPowerSlack))) {
      reject(Rule::kPowerBounds, "total active power " + watts(total) + " exceeds P_max " + watts(scope.p_max_w));
    }
  }
  return verdict;
}

}  // namespace ranop
