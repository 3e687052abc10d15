#pragma once

#include "branchscore/runtime/trace.hpp"

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace branchscore::runtime {

/// `var=value@spec` where spec is `a..b` (inclusive), `a` or `a..` (from a
/// onward) or absent (from unit 0).
struct Assignment {
  std::string var;
  store::Value value = 0;
  std::uint64_t from = 0;
  std::optional<std::uint64_t> to; // inclusive; nullopt means forever
  friend bool operator==(const Assignment &, const Assignment &) = default;
};

/// Throws std::invalid_argument with a readable message.
Assignment parse_assignment(std::string_view text);

/// Scripted environment. Where assignments overlap, the one starting latest
/// wins; ties go to the one added last.
class Script {
public:
  void add(Assignment a) { items_.push_back(std::move(a)); }
  /// Last value per variable for `unit`, in first-mention order.
  std::vector<std::pair<std::string, store::Value>> at(std::uint64_t unit) const;
  bool empty() const { return items_.empty(); }

private:
  std::vector<Assignment> items_;
};

struct RunOptions {
  std::chrono::milliseconds tick{0}; // 0: run as fast as possible
  ntcc::EngineOptions engine;
  std::uint64_t max_units = 10000;
  bool timing = false; // record compute_us
};

/// Steps a compiled score one unit at a time.
class Runner {
public:
  Runner(const score::CompiledScore &cs, RunOptions options);

  /// Tells `values` (score variables by name) into this unit's store.
  /// Throws std::invalid_argument for unknown variables or out-of-range
  /// values, and ntcc::EngineError for faults inside the unit.
  TraceRecord step(const std::vector<std::pair<std::string, store::Value>> &values = {});

  std::uint64_t unit() const { return engine_.unit(); }
  /// True once the end point has been active.
  bool ended() const { return ended_; }
  const score::CompiledScore &compiled() const { return cs_; }
  /// Back to unit 0 with the original seed.
  void reset();

private:
  const score::CompiledScore &cs_;
  RunOptions options_;
  ntcc::Engine initial_;
  ntcc::Engine engine_;
  bool ended_ = false;
};

struct RunSummary {
  std::uint64_t units = 0;
  bool ended = false;
  std::uint64_t overruns = 0;
};

/// Runs until the end point is active or max_units have elapsed, pacing
/// units at options.tick. Overruns are reported to `log`, never skipped.
RunSummary run(const score::CompiledScore &cs, const Script &script, const RunOptions &options,
               const std::function<void(const TraceRecord &)> &sink, std::ostream &log);

} // namespace branchscore::runtime
