#include "ranop/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ranop/common.hpp"

namespace ranop {

using nlohmann::json;

namespace {

std::vector<std::string> id_list(const json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  return doc.at(key).get<std::vector<std::string>>();
}

std::size_t index_of(const std::vector<std::string>& ids, const json& ref, const char* what) {
  if (ref.is_number_unsigned()) {
    auto i = ref.get<std::size_t>();
    if (i >= ids.size()) throw ScenarioError(std::string(what) + " index out of range");
    return i;
  }
  const auto name = ref.get<std::string>();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == name) return i;
  }
  throw ScenarioError(std::string("unknown ") + what + " '" + name + "'");
}

// Row-major flattening of a rows x cols matrix, reporting the first missing
// entry by its (row id, col id) pair.
std::vector<double> matrix(const json& rows, const std::vector<std::string>& row_ids,
                           const std::vector<std::string>& col_ids, const char* what) {
  if (!rows.is_array()) throw ScenarioError(std::string(what) + " must be an array of rows");
  std::vector<double> out;
  out.reserve(row_ids.size() * col_ids.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    if (r >= rows.size() || !rows[r].is_array()) {
      throw ScenarioError(std::string("missing ") + what + " entry for (" + row_ids[r] + ", " + col_ids[0] + ")");
    }
    for (std::size_t c = 0; c < col_ids.size(); ++c) {
      if (c >= rows[r].size() || !rows[r][c].is_number()) {
        throw ScenarioError(std::string("missing ") + what + " entry for (" + row_ids[r] + ", " + col_ids[c] +
                            ")");
      }
      out.push_back(rows[r][c].get<double>());
    }
  }
  return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw ScenarioError("scenario document must be a JSON object");
    ScenarioConfig s;
    s.cells = doc.at("cell_count").get<std::size_t>();
    s.users = doc.at("user_count").get<std::size_t>();
    s.flows = doc.value("flow_count", std::size_t{1});
    if (s.cells == 0 || s.users == 0 || s.flows == 0) throw ScenarioError("counts must be >= 1");

    s.cell_ids = id_list(doc, "cell_ids");
    s.user_ids = id_list(doc, "user_ids");
    s.flow_ids = id_list(doc, "flow_ids");
    s.carrier_ids = id_list(doc, "carriers");
    s.rb_ids = id_list(doc, "rb_ids");
    if (s.rb_ids.empty() && doc.contains("rb_count")) {
      auto n = doc.at("rb_count").get<std::size_t>();
      for (std::size_t i = 0; i < n; ++i) s.rb_ids.push_back("rb_" + std::to_string(i + 1));
    }
    // Default ids are needed before references below can be resolved.
    auto fill = [](std::vector<std::string>& ids, const char* prefix, std::size_t n, std::size_t base) {
      if (!ids.empty()) return;
      for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i + base));
    };
    fill(s.cell_ids, "cell_", s.cells, 1);
    fill(s.user_ids, "user_", s.users, 1);
    fill(s.carrier_ids, "carrier_", s.cells, 1);
    fill(s.flow_ids, "flow_", s.flows, 0);

    if (doc.contains("cell_carrier")) {
      for (const auto& ref : doc.at("cell_carrier")) s.cell_carrier.push_back(index_of(s.carrier_ids, ref, "carrier"));
    }
    if (doc.contains("serving_cell")) {
      for (const auto& ref : doc.at("serving_cell")) s.serving_cell.push_back(index_of(s.cell_ids, ref, "cell"));
    }

    if (doc.contains("gains")) {
      s.gains = matrix(doc.at("gains"), s.user_ids, s.cell_ids, "gain");
    } else if (doc.contains("pathloss")) {
      // Log-distance model: g = reference_gain * (d / 1 m)^-exponent.
      const auto& pl = doc.at("pathloss");
      const double exponent = pl.value("exponent", 3.5);
      const double reference = pl.value("reference_gain", 1e-3);
      auto dist = matrix(pl.at("distances_m"), s.user_ids, s.cell_ids, "distance");
      for (double d : dist) {
        if (!(d > 0.0)) throw ScenarioError("pathloss distances must be > 0");
        s.gains.push_back(reference * std::pow(d, -exponent));
      }
    } else {
      throw ScenarioError("scenario needs either 'gains' or 'pathloss'");
    }

    s.rx_antennas = doc.value("rx_antennas", std::size_t{1});
    s.tx_antennas = doc.value("tx_antennas", std::size_t{1});
    if (doc.contains("channel_matrices")) {
      for (const auto& user : doc.at("channel_matrices")) {
        std::vector<std::complex<double>> h;
        for (const auto& entry : user) h.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
        s.channel_matrices.push_back(std::move(h));
      }
    }

    s.noise_w = dbm_to_watts(doc.at("noise_dbm").get<double>());
    s.p_max_w = dbm_to_watts(doc.at("p_max_dbm").get<double>());
    s.p_max_cell_w = dbm_to_watts(doc.at("p_max_cell_dbm").get<double>());
    s.p_min_w = doc.contains("p_min_dbm") ? dbm_to_watts(doc.at("p_min_dbm").get<double>()) : 0.0;

    if (doc.contains("arrival_rates")) {
      s.arrival_rates = matrix(doc.at("arrival_rates"), s.user_ids, s.flow_ids, "arrival rate");
    }
    const auto& bw = doc.at("bandwidth_hz");
    if (bw.is_number()) {
      s.bandwidth_hz.assign(s.users, bw.get<double>());
    } else {
      s.bandwidth_hz = bw.get<std::vector<double>>();
    }
    s.rb_bandwidth_hz = doc.value("rb_bandwidth_hz", 180e3);
    s.static_carrier_w = doc.contains("static_carrier_dbm")
                             ? dbm_to_watts(doc.at("static_carrier_dbm").get<double>())
                             : 0.0;
    s.tick_seconds = doc.value("tick_seconds", 0.01);

    const auto mode = doc.value("mode", std::string("config-response"));
    auto parsed_mode = mode_from_name(mode);
    if (!parsed_mode) throw ScenarioError("unknown mode '" + mode + "'");
    s.mode = *parsed_mode;
    s.seed = doc.value("seed", std::uint64_t{0});

    if (doc.contains("initial")) {
      const auto& init = doc.at("initial");
      if (init.contains("powers_dbm")) s.initial.powers_dbm = init.at("powers_dbm").get<std::vector<double>>();
      if (init.contains("carriers")) {
        const auto& c = init.at("carriers");
        if (c.is_object()) {
          s.initial.carrier_active.assign(s.carrier_ids.size(), true);
          for (const auto& [id, on] : c.items()) {
            s.initial.carrier_active[index_of(s.carrier_ids, json(id), "carrier")] = on.get<bool>();
          }
        } else {
          s.initial.carrier_active = c.get<std::vector<bool>>();
        }
      }
      if (init.contains("scheduler_weights")) {
        s.initial.scheduler_weights = init.at("scheduler_weights").get<std::vector<double>>();
      }
      if (init.contains("queues")) s.initial.queue_bits = matrix(init.at("queues"), s.user_ids, s.flow_ids, "queue");
    }

    finalize_scenario(s);
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario document: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ScenarioError("scenario file " + path + " is not valid JSON");
  return scenario_from_json(doc);
}

json scenario_to_json(const ScenarioConfig& s) {
  auto rows = [](const std::vector<double>& flat, std::size_t cols) {
    json out = json::array();
    for (std::size_t i = 0; i < flat.size(); i += cols) {
      out.push_back(std::vector<double>(flat.begin() + i, flat.begin() + i + cols));
    }
    return out;
  };
  json doc;
  doc["cell_count"] = s.cells;
  doc["user_count"] = s.users;
  doc["flow_count"] = s.flows;
  doc["cell_ids"] = s.cell_ids;
  doc["user_ids"] = s.user_ids;
  doc["flow_ids"] = s.flow_ids;
  doc["carriers"] = s.carrier_ids;
  doc["rb_ids"] = s.rb_ids;
  json cc = json::array();
  for (auto c : s.cell_carrier) cc.push_back(s.carrier_ids[c]);
  doc["cell_carrier"] = cc;
  json sv = json::array();
  for (auto m : s.serving_cell) sv.push_back(s.cell_ids[m]);
  doc["serving_cell"] = sv;
  doc["gains"] = rows(s.gains, s.cells);
  doc["noise_dbm"] = watts_to_dbm(s.noise_w);
  doc["p_max_dbm"] = watts_to_dbm(s.p_max_w);
  doc["p_max_cell_dbm"] = watts_to_dbm(s.p_max_cell_w);
  if (s.p_min_w > 0.0) doc["p_min_dbm"] = watts_to_dbm(s.p_min_w);
  doc["arrival_rates"] = rows(s.arrival_rates, s.flows);
  doc["bandwidth_hz"] = s.bandwidth_hz;
  doc["rb_bandwidth_hz"] = s.rb_bandwidth_hz;
  if (s.static_carrier_w > 0.0) doc["static_carrier_dbm"] = watts_to_dbm(s.static_carrier_w);
  doc["tick_seconds"] = s.tick_seconds;
  doc["mode"] = mode_name(s.mode);
  doc["seed"] = s.seed;
  doc["initial"]["powers_dbm"] = s.initial.powers_dbm;
  doc["initial"]["carriers"] = s.initial.carrier_active;
  doc["initial"]["scheduler_weights"] = s.initial.scheduler_weights;
  doc["initial"]["queues"] = rows(s.initial.queue_bits, s.flows);
  return doc;
}

}  // namespace ranop
