#pragma once

#include <memory>
#include <string>

#include "session_plans.hpp"
#include "teamsim/protocol.hpp"

namespace teamsim::tools {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  // Simulated seconds per wall-clock second; above 1 only for testing.
  double time_scale = 1.0;
};

// WebSocket front end for live sessions. Clients connect to /session/<id>;
// all sessions share one single-threaded io_context, each with its own tick timer.
class Server {
 public:
  Server(SessionPlanFile plans, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  // Blocks until stop() is called.
  void run();
  // Safe to call from another thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace teamsim::tools
