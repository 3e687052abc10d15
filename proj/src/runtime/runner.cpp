#include "branchscore/runtime/runner.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace branchscore::runtime {

namespace {

template <typename T> T number(std::string_view s, std::string_view what, std::string_view whole) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("bad " + std::string(what) + " in '" + std::string(whole) + "'");
  return v;
}

} // namespace

Assignment parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("expected var=value[@unit|@a..b|@a..], got '" + std::string(text) + "'");
  Assignment a;
  a.var = std::string(text.substr(0, eq));
  auto rest = text.substr(eq + 1);
  const auto at = rest.find('@');
  a.value = number<store::Value>(rest.substr(0, at), "value", text);
  if (at == std::string_view::npos)
    return a;
  auto spec = rest.substr(at + 1);
  const auto dots = spec.find("..");
  if (dots == std::string_view::npos) {
    a.from = number<std::uint64_t>(spec, "unit", text);
    return a;
  }
  a.from = number<std::uint64_t>(spec.substr(0, dots), "unit", text);
  auto hi = spec.substr(dots + 2);
  if (!hi.empty()) {
    a.to = number<std::uint64_t>(hi, "unit", text);
    if (*a.to < a.from)
      throw std::invalid_argument("empty unit range in '" + std::string(text) + "'");
  }
  return a;
}

std::vector<std::pair<std::string, store::Value>> Script::at(std::uint64_t unit) const {
  std::vector<std::pair<std::string, store::Value>> out;
  std::vector<std::uint64_t> since;
  for (const auto &a : items_) {
    if (unit < a.from || (a.to && unit > *a.to))
      continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto &p) { return p.first == a.var; });
    if (it == out.end()) {
      out.emplace_back(a.var, a.value);
      since.push_back(a.from);
      continue;
    }
    auto &from = since[static_cast<std::size_t>(it - out.begin())];
    if (a.from >= from) {
      it->second = a.value;
      from = a.from;
    }
  }
  return out;
}

Runner::Runner(const score::CompiledScore &cs, RunOptions options)
    : cs_(cs), options_(options), initial_(cs.program, options.engine), engine_(initial_) {}

void Runner::reset() {
  engine_ = initial_; // skips re-validating the program
  ended_ = false;
}

TraceRecord Runner::step(const std::vector<std::pair<std::string, store::Value>> &values) {
  std::vector<store::Constraint> env;
  for (const auto &[name, v] : values) {
    auto var = cs_.variable(name);
    if (!var)
      throw std::invalid_argument("unknown variable " + name);
    const auto &decl = cs_.program->vocab.decl(*var);
    if (v < decl.lo || v > decl.hi)
      throw std::invalid_argument("value " + std::to_string(v) + " for " + name + " is outside [" +
                                  std::to_string(decl.lo) + ", " + std::to_string(decl.hi) + "]");
    env.push_back(store::eq(*var, v));
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto tick = engine_.step(env);
  const auto t1 = std::chrono::steady_clock::now();
  auto rec = make_record(cs_, tick);
  if (options_.timing)
    rec.compute_us = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  if (cs_.end_index && rec.is_active(cs_.points[*cs_.end_index]))
    ended_ = true;
  return rec;
}

RunSummary run(const score::CompiledScore &cs, const Script &script, const RunOptions &options,
               const std::function<void(const TraceRecord &)> &sink, std::ostream &log) {
  if (options.max_units < 1)
    throw std::invalid_argument("max-units must be ≥ 1");
  auto opts = options;
  opts.timing = true; // needed for overrun detection; stripped below if not requested
  Runner runner(cs, opts);
  RunSummary summary;
  auto next = std::chrono::steady_clock::now();
  while (summary.units < options.max_units && !runner.ended()) {
    const auto unit = runner.unit();
    auto rec = runner.step(script.at(unit));
    ++summary.units;
    const auto us = *rec.compute_us;
    if (!options.timing)
      rec.compute_us.reset();
    sink(rec);
    if (options.tick.count() > 0) {
      const auto budget = std::chrono::duration_cast<std::chrono::microseconds>(options.tick).count();
      if (us > budget) {
        ++summary.overruns;
        log << "overrun at unit " << unit << ": " << us << " us > " << budget << " us\n";
      }
      next += options.tick;
      std::this_thread::sleep_until(next);
    }
  }
  summary.ended = runner.ended();
  return summary;
}

} // namespace branchscore::runtime
