#pragma once

#include "branchscore/live/session.hpp"

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <thread>

namespace branchscore::live {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8737; // 0 picks a free port
  /// Frames queued per client before it is dropped as too slow.
  std::size_t max_queue = 1024;
  /// Let SIGINT/SIGTERM end wait().
  bool handle_signals = false;
};

/// WebSocket front end for a Session: one network thread, one tick thread.
class Server {
public:
  /// Binds immediately; throws std::system_error if the port is taken.
  Server(Session &session, ServerOptions options, std::ostream &log);
  ~Server();
  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  std::uint16_t port() const;
  void start();
  /// Blocks until stop() is called from another thread or a signal.
  void wait();
  void stop();

  std::size_t connections() const;
  std::uint64_t overruns() const { return overruns_.load(); }

  struct Impl; // opaque

private:
  std::unique_ptr<Impl> impl_;
  std::atomic<std::uint64_t> overruns_{0};
};

} // namespace branchscore::live
