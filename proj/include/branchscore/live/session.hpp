#pragma once

#include "branchscore/runtime/runner.hpp"

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace branchscore::live {

inline constexpr int kProtocolVersion = 1;

struct SessionOptions {
  ntcc::EngineOptions engine;
  std::chrono::milliseconds tick{100};
};

/// Protocol state of one hosted score, independent of the transport.
///
/// handle() may be called from any thread. boundary() belongs to the tick
/// loop: it applies everything received since the previous call, then runs
/// one unit if the transport is playing. Input that arrives while a unit is
/// being computed is therefore seen at the following unit.
class Session {
public:
  Session(std::shared_ptr<const score::CompiledScore> cs, SessionOptions options);

  struct Reply {
    std::vector<std::string> to_sender;
    bool subscribe = false;
    bool unsubscribe = false;
  };
  Reply handle(std::string_view text);

  struct Output {
    std::vector<std::string> to_subscribers; // tick, ended
    std::vector<std::string> to_all;         // hello after reset, fatal errors
    bool stepped = false;
    std::int64_t compute_us = 0;
  };
  Output boundary();

  std::string hello() const;
  bool playing() const;
  bool ended() const;
  std::uint64_t unit() const; // next unit to run
  std::chrono::milliseconds tick_period() const { return options_.tick; }

  /// Called on the loop thread just before a unit is computed, after input
  /// has been drained. Tests use it to stretch a tick.
  void set_before_step(std::function<void(std::uint64_t)> hook);

private:
  struct Command {
    enum class Kind { SetVar, Start, Stop, Reset } kind;
    std::string name;
    store::Value value = 0;
  };

  std::shared_ptr<const score::CompiledScore> cs_;
  SessionOptions options_;

  mutable std::mutex mu_;
  std::deque<Command> inbox_;
  bool playing_ = false;
  bool ended_ = false;
  std::uint64_t unit_ = 0;
  std::function<void(std::uint64_t)> before_step_;

  // Loop-thread state.
  runtime::Runner runner_;
  std::vector<std::pair<std::string, store::Value>> held_; // told every unit
  std::vector<std::string> pending_warnings_;
};

/// Envelope helpers: {"type": ..., "payload": ...}.
std::string envelope(std::string_view type, const nlohmann::ordered_json &payload);
std::string error_message(std::string_view message);

} // namespace branchscore::live
