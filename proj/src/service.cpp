#include "ranop/service.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ranop/trajectory_io.hpp"

namespace ranop {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& reason, const std::string& path = "") {
  json body = {{"error", {{"reason", reason}}}};
  if (!path.empty()) body["error"]["path"] = path;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<std::uint64_t> parse_u64(const std::string& text) {
  if (text.empty() || text.size() > 19) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace

struct LoopService::Impl {
  Impl(ScenarioConfig scenario, Intent intent, std::unique_ptr<Policy> p, LoopConfig loop, ServiceOptions opts)
      : policy(std::move(p)), options(std::move(opts)), gate_mode(loop.gate), eps_fp(loop.eps_fp),
        engine(std::move(scenario), std::move(intent), *policy, std::move(loop)) {
    publish();
  }

  std::unique_ptr<Policy> policy;
  ServiceOptions options;
  GateMode gate_mode;
  double eps_fp;
  LoopEngine engine;  // touched only by the loop thread (or run_ticks)

  // Loop-thread bookkeeping for diagnostics.
  std::deque<std::pair<std::uint64_t, double>> recent_residuals;
  std::optional<double> k_hat;
  double last_residual = -1.0;
  std::optional<std::uint64_t> published;

  httplib::Server server;
  std::thread http_thread;
  std::thread loop_thread;
  int bound_port = -1;

  std::mutex m;
  std::condition_variable changed;  // new records, stop, halt
  bool stopping = false;
  std::string halted;

  // Published snapshots (guarded by m).
  std::deque<std::pair<std::uint64_t, std::string>> lines;
  std::uint64_t latest_tick = 0;
  json state_doc;
  json diag_doc;
  std::map<std::string, GateStatus> gate_view;
  std::set<std::string> gate_claimed;

  // Inbox (guarded by m).
  std::vector<Intent> intents;
  std::vector<std::pair<std::string, bool>> gate_inbox;

  void track(const TrajectoryRecord& r) {
    if (r.tick == 0) return;
    if (last_residual > 1e-12) {
      const double ratio = r.residual / last_residual;
      if (!k_hat || ratio > *k_hat) k_hat = ratio;
    }
    last_residual = r.residual;
    recent_residuals.emplace_back(r.tick, r.residual);
    while (recent_residuals.size() > 500) recent_residuals.pop_front();
  }

  // Loop thread only.
  void publish() {
    const auto& records = engine.records();
    std::vector<const TrajectoryRecord*> unseen;
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
      if (published && it->tick <= *published) break;
      unseen.push_back(&*it);
    }
    std::reverse(unseen.begin(), unseen.end());
    std::vector<std::pair<std::uint64_t, std::string>> fresh;
    for (const auto* r : unseen) {
      track(*r);
      fresh.emplace_back(r->tick, record_to_json(*r).dump());
    }
    published = records.back().tick;

    const auto& ctx = engine.context();
    const auto kpis = compute_kpis(engine.state(), engine.scenario());
    json proposals = json::array();
    std::map<std::string, GateStatus> view;
    for (const auto& [id, p] : engine.proposals()) {
      view[id] = p.status;
      proposals.push_back({{"decision_id", id},
                           {"commands", p.text},
                           {"proposed_tick", p.proposed_tick},
                           {"status", gate_status_name(p.status)}});
    }
    json state = {{"tick", engine.state().tick},
                  {"tokens", ctx.tokens},
                  {"text", ctx.text()},
                  {"digest", ctx.digest},
                  {"source_tick", ctx.source_tick},
                  {"kpis", kpis_to_json(kpis)},
                  {"utility", records.back().utility},
                  {"active_intent", intent_to_json(engine.active_intent())},
                  {"pending_intent", engine.pending_intent() ? intent_to_json(*engine.pending_intent()) : json()},
                  {"gate", gate_mode == GateMode::kManual ? "manual" : "auto"},
                  {"proposals", proposals}};

    json residuals = json::array();
    for (const auto& [tick, value] : recent_residuals) residuals.push_back({{"tick", tick}, {"residual", value}});
    const auto fp = engine.fixed_point();
    json diag = {{"k_hat", k_hat ? json(*k_hat) : json()},
                 {"eps_fp", eps_fp},
                 {"residuals", residuals},
                 {"fixed_point", fp ? json{{"tick", fp->tick}, {"state_digest", fp->state_digest}} : json()},
                 {"status", engine.stop_reason()},
                 {"faults", engine.faults()}};

    std::lock_guard lock(m);
    for (auto& entry : fresh) {
      latest_tick = entry.first;
      lines.push_back(std::move(entry));
    }
    while (lines.size() > options.retain_lines) lines.pop_front();
    if (!halted.empty()) diag["status"] = "halted: " + halted;
    state_doc = std::move(state);
    diag_doc = std::move(diag);
    gate_view = std::move(view);
    changed.notify_all();
  }

  void drain() {
    std::vector<Intent> posted;
    std::vector<std::pair<std::string, bool>> gates;
    {
      std::lock_guard lock(m);
      posted.swap(intents);
      gates.swap(gate_inbox);
    }
    for (auto& i : posted) engine.post_intent(std::move(i));
    for (const auto& [id, approve] : gates) engine.resolve(id, approve);
  }

  bool tick_once() {
    drain();
    if (engine.finished()) return false;
    try {
      engine.advance();
    } catch (const FaultBudgetExceeded& e) {
      {
        std::lock_guard lock(m);
        halted = e.what();
      }
      publish();
      return false;
    }
    publish();
    return true;
  }

  bool is_halted() {
    std::lock_guard lock(m);
    return !halted.empty();
  }

  void loop_main() {
    while (true) {
      {
        std::lock_guard lock(m);
        if (stopping) return;
      }
      const bool ticked = !is_halted() && tick_once();
      const int pause = ticked ? options.pace_ms : 20;
      if (pause > 0) {
        std::unique_lock lock(m);
        changed.wait_for(lock, std::chrono::milliseconds(pause), [&] { return stopping; });
      }
    }
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send_error(res, 500, what);
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      send_error(res, res.status, res.status == 404 ? "no such endpoint: " + req.path : "request failed");
    });

    server.Post("/intent", [this](const httplib::Request& req, httplib::Response& res) {
      auto intent = parse_intent(req.body);
      if (!intent) {
        send_error(res, 400, intent.error().reason, intent.error().path);
        return;
      }
      if (!permitted(*intent)) {
        send_error(res, 422, "intent is outside the permitted goal policy");
        return;
      }
      json doc = intent_to_json(*intent);
      {
        std::lock_guard lock(m);
        intents.push_back(std::move(*intent));
      }
      res.status = 202;
      res.set_content(json{{"accepted", true}, {"effective", "next non-rt boundary"}, {"intent", doc}}.dump(),
                      "application/json");
    });

    server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(m);
      res.set_content(state_doc.dump(), "application/json");
    });

    server.Get("/diagnostics", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(m);
      res.set_content(diag_doc.dump(), "application/json");
    });

    server.Get("/trajectory", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t from = 0;
      std::size_t limit = options.page_limit;
      if (req.has_param("from")) {
        auto v = parse_u64(req.get_param_value("from"));
        if (!v) return send_error(res, 400, "from must be a non-negative tick", "from");
        from = *v;
      }
      if (req.has_param("limit")) {
        auto v = parse_u64(req.get_param_value("limit"));
        if (!v || *v == 0) return send_error(res, 400, "limit must be a positive integer", "limit");
        limit = static_cast<std::size_t>(std::min<std::uint64_t>(*v, options.page_limit));
      }
      std::string body;
      std::size_t count = 0;
      {
        std::lock_guard lock(m);
        auto it = std::lower_bound(lines.begin(), lines.end(), from,
                                   [](const auto& entry, std::uint64_t t) { return entry.first < t; });
        for (; it != lines.end() && count < limit; ++it, ++count) {
          body += it->second;
          body += '\n';
        }
      }
      res.set_header("X-Record-Count", std::to_string(count));
      res.set_content(body, "application/x-ndjson");
    });

    server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t cursor = 0;
      bool have_cursor = false;
      if (req.has_param("from")) {
        auto v = parse_u64(req.get_param_value("from"));
        if (!v) return send_error(res, 400, "from must be a non-negative tick", "from");
        cursor = *v;
        have_cursor = true;
      } else if (req.has_header("Last-Event-ID")) {
        if (auto v = parse_u64(req.get_header_value("Last-Event-ID"))) {
          cursor = *v + 1;
          have_cursor = true;
        }
      }
      if (!have_cursor) {
        std::lock_guard lock(m);
        cursor = latest_tick + 1;
      }
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) mutable {
            std::string chunk;
            {
              std::unique_lock lock(m);
              changed.wait_for(lock, std::chrono::milliseconds(250),
                               [&] { return stopping || (!lines.empty() && lines.back().first >= cursor); });
              if (stopping) {
                lock.unlock();
                sink.done();
                return true;
              }
              auto it = std::lower_bound(lines.begin(), lines.end(), cursor,
                                         [](const auto& entry, std::uint64_t t) { return entry.first < t; });
              for (; it != lines.end(); ++it) {
                chunk += "id: " + std::to_string(it->first) + "\ndata: " + it->second + "\n\n";
                cursor = it->first + 1;
              }
            }
            if (chunk.empty()) chunk = ": keep-alive\n\n";
            return sink.write(chunk.data(), chunk.size());
          });
    });

    server.Post(R"(/gate/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      std::string decision = req.body;
      auto doc = json::parse(req.body, nullptr, false);
      if (!doc.is_discarded() && doc.is_object() && doc.contains("decision") && doc["decision"].is_string()) {
        decision = doc["decision"].get<std::string>();
      } else if (!doc.is_discarded() && doc.is_string()) {
        decision = doc.get<std::string>();
      }
      while (!decision.empty() && std::isspace(static_cast<unsigned char>(decision.back()))) decision.pop_back();
      if (decision != "approve" && decision != "reject") {
        return send_error(res, 400, "decision must be approve or reject", "decision");
      }
      if (gate_mode != GateMode::kManual) return send_error(res, 409, "service is not in manual gating mode");

      std::lock_guard lock(m);
      auto it = gate_view.find(id);
      if (it == gate_view.end()) return send_error(res, 404, "unknown decision '" + id + "'");
      if (it->second != GateStatus::kPending || gate_claimed.count(id)) {
        return send_error(res, 409, "decision '" + id + "' is no longer pending");
      }
      gate_claimed.insert(id);
      gate_inbox.emplace_back(id, decision == "approve");
      res.set_content(json{{"decision_id", id}, {"decision", decision}, {"effective", "next non-rt boundary"}}.dump(),
                      "application/json");
    });
  }
};

LoopService::LoopService(ScenarioConfig scenario, Intent intent, std::unique_ptr<Policy> policy, LoopConfig loop,
                         ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(intent), std::move(policy), std::move(loop),
                                   std::move(options))) {
  impl_->routes();
}

LoopService::~LoopService() { stop(); }

int LoopService::start() {
  auto& s = *impl_;
  if (s.bound_port >= 0) return s.bound_port;
  const int port = s.options.port == 0 ? s.server.bind_to_any_port(s.options.host)
                                       : (s.server.bind_to_port(s.options.host, s.options.port) ? s.options.port : -1);
  if (port < 0) throw ConfigError("cannot bind " + s.options.host + ":" + std::to_string(s.options.port));
  s.bound_port = port;
  s.http_thread = std::thread([&s] { s.server.listen_after_bind(); });
  s.server.wait_until_ready();
  if (s.options.autorun) s.loop_thread = std::thread([&s] { s.loop_main(); });
  return port;
}

void LoopService::stop() {
  auto& s = *impl_;
  {
    std::lock_guard lock(s.m);
    s.stopping = true;
    s.changed.notify_all();
  }
  if (s.loop_thread.joinable()) s.loop_thread.join();
  s.server.stop();
  if (s.http_thread.joinable()) s.http_thread.join();
}

std::string LoopService::wait() {
  auto& s = *impl_;
  std::unique_lock lock(s.m);
  s.changed.wait(lock, [&] { return s.stopping || !s.halted.empty(); });
  return s.halted;
}

void LoopService::run_ticks(std::uint64_t n) {
  auto& s = *impl_;
  if (s.options.autorun) throw std::logic_error("run_ticks requires autorun = false");
  for (std::uint64_t i = 0; i < n && !s.is_halted(); ++i) {
    if (!s.tick_once()) break;
  }
}

int LoopService::port() const { return impl_->bound_port; }

}  // namespace ranop
