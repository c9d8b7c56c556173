#pragma once

#include <memory>
#include <string>

#include "ranop/loop.hpp"

namespace ranop {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds any free port
  int pace_ms = 10;  // wall-clock sleep per tick; 0 runs unpaced
  bool autorun = true;  // false: ticks advance only through run_ticks()
  std::size_t retain_lines = 200000;
  std::size_t page_limit = 1000;
};

// HTTP surface over one live loop:
//   POST /intent            intent JSON, applied at the next non-rt boundary
//   GET  /state             latest token context, KPIs, active intent, gate queue
//   GET  /trajectory?from=T JSONL page of records with tick >= T (&limit=N)
//   GET  /events            server-sent events, one record per tick
//   POST /gate/{id}         "approve" | "reject" (manual gating)
//   GET  /diagnostics       residual ratio, recent residuals, fixed-point status
//
// The loop thread is the only writer of loop state. Handlers read published
// snapshots and leave intents and gate decisions in an inbox that the loop
// drains between ticks.
class LoopService {
 public:
  LoopService(ScenarioConfig scenario, Intent intent, std::unique_ptr<Policy> policy, LoopConfig loop,
              ServiceOptions options);
  ~LoopService();
  LoopService(const LoopService&) = delete;
  LoopService& operator=(const LoopService&) = delete;

  // Binds and starts serving; returns the bound port. Throws ConfigError when
  // the address cannot be bound.
  int start();
  void stop();

  // Blocks until stop() or until the loop halts on its fault budget. Returns
  // the halt message, empty after a plain stop.
  std::string wait();

  // Caller-driven ticking for autorun == false.
  void run_ticks(std::uint64_t n);

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ranop
