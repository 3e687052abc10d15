#pragma once

#include "branchscore/score/compile.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace branchscore::runtime {

struct ProcEvent {
  std::string event; // "start" | "stop"
  std::string name;
  std::vector<std::string> params;
  std::string interval;
  friend bool operator==(const ProcEvent &, const ProcEvent &) = default;
};

struct Transfer {
  std::string src;
  std::string dst;
  friend bool operator==(const Transfer &, const Transfer &) = default;
};

/// One time unit as seen from the score.
struct TraceRecord {
  std::uint64_t unit = 0;
  std::vector<std::string> active;   // score order
  std::vector<Transfer> transfers;   // score order
  std::vector<ProcEvent> procs;      // emission order
  std::vector<std::pair<std::string, std::optional<store::Value>>> vars;
  std::vector<std::string> warnings;
  std::optional<std::int64_t> compute_us;
  friend bool operator==(const TraceRecord &, const TraceRecord &) = default;

  bool is_active(std::string_view point) const;
};

TraceRecord make_record(const score::CompiledScore &cs, const ntcc::TickResult &tick);

/// Field order is fixed: unit, active, points, transfers, procs, vars,
/// warnings, then compute_us when present.
nlohmann::ordered_json to_json(const TraceRecord &r, const score::CompiledScore &cs);
/// Compact single line, no trailing newline.
std::string to_json_line(const TraceRecord &r, const score::CompiledScore &cs);

} // namespace branchscore::runtime
