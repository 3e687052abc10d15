#include "branchscore/runtime/trace.hpp"

#include <algorithm>

namespace branchscore::runtime {

bool TraceRecord::is_active(std::string_view point) const {
  return std::find(active.begin(), active.end(), point) != active.end();
}

TraceRecord make_record(const score::CompiledScore &cs, const ntcc::TickResult &tick) {
  TraceRecord r;
  r.unit = tick.unit;
  const auto &obs = tick.observables;
  for (std::size_t k = 0; k < cs.points.size(); ++k)
    if (obs[cs.point_offset() + k].value == 1)
      r.active.push_back(cs.points[k]);
  for (std::size_t k = 0; k < cs.transfers.size(); ++k)
    if (obs[cs.transfer_offset() + k].value == 1)
      r.transfers.push_back({cs.transfers[k].src, cs.transfers[k].dst});
  for (std::size_t k = 0; k < cs.variables.size(); ++k)
    r.vars.emplace_back(cs.variables[k].name, obs[cs.variable_offset() + k].value);
  for (const auto &e : tick.events)
    r.procs.push_back({e.kind, e.name, e.params, e.tag});
  r.warnings = tick.warnings;
  return r;
}

nlohmann::ordered_json to_json(const TraceRecord &r, const score::CompiledScore &cs) {
  nlohmann::ordered_json j;
  j["unit"] = r.unit;
  j["active"] = r.active;
  auto points = nlohmann::ordered_json::object();
  for (const auto &p : cs.points)
    points[p] = r.is_active(p);
  j["points"] = std::move(points);
  auto transfers = nlohmann::ordered_json::array();
  for (const auto &t : r.transfers)
    transfers.push_back({{"src", t.src}, {"dst", t.dst}});
  j["transfers"] = std::move(transfers);
  auto procs = nlohmann::ordered_json::array();
  for (const auto &e : r.procs)
    procs.push_back({{"event", e.event}, {"name", e.name}, {"params", e.params}, {"interval", e.interval}});
  j["procs"] = std::move(procs);
  auto vars = nlohmann::ordered_json::object();
  for (const auto &[name, value] : r.vars)
    vars[name] = value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
  j["vars"] = std::move(vars);
  j["warnings"] = r.warnings;
  if (r.compute_us)
    j["compute_us"] = *r.compute_us;
  return j;
}

std::string to_json_line(const TraceRecord &r, const score::CompiledScore &cs) {
  return to_json(r, cs).dump();
}

} // namespace branchscore::runtime
