#include "branchscore/live/session.hpp"

#include <algorithm>

namespace branchscore::live {

using nlohmann::ordered_json;

std::string envelope(std::string_view type, const ordered_json &payload) {
  ordered_json j;
  j["type"] = type;
  j["payload"] = payload;
  return j.dump();
}

std::string error_message(std::string_view message) {
  return envelope("error", {{"message", message}});
}

Session::Session(std::shared_ptr<const score::CompiledScore> cs, SessionOptions options)
    : cs_(std::move(cs)), options_(options), runner_(*cs_, {options.tick, options.engine, 1, false}) {}

void Session::set_before_step(std::function<void(std::uint64_t)> hook) {
  std::lock_guard lock(mu_);
  before_step_ = std::move(hook);
}

bool Session::playing() const {
  std::lock_guard lock(mu_);
  return playing_;
}

bool Session::ended() const {
  std::lock_guard lock(mu_);
  return ended_;
}

std::uint64_t Session::unit() const {
  std::lock_guard lock(mu_);
  return unit_;
}

std::string Session::hello() const {
  const auto &s = cs_->score;
  ordered_json p;
  p["version"] = kProtocolVersion;
  p["start"] = s.start;
  p["end"] = s.end ? ordered_json(*s.end) : ordered_json(nullptr);
  auto points = ordered_json::array();
  for (const auto &pt : s.points)
    points.push_back({{"id", pt.id}, {"pre", score::to_string(pt.pre)}, {"post", score::to_string(pt.post)}});
  p["points"] = std::move(points);
  auto intervals = ordered_json::array();
  for (const auto &i : s.intervals)
    intervals.push_back({{"id", i.id},
                         {"kind", score::to_string(i.kind)},
                         {"src", i.src},
                         {"dst", i.dst},
                         {"duration", i.duration},
                         {"proc", i.proc}});
  p["intervals"] = std::move(intervals);
  auto vars = ordered_json::array();
  for (const auto &v : cs_->variables)
    vars.push_back({{"name", v.name}, {"lo", v.lo}, {"hi", v.hi}});
  p["variables"] = std::move(vars);
  p["tick_ms"] = options_.tick.count();
  {
    std::lock_guard lock(mu_);
    p["unit"] = unit_;
    p["playing"] = playing_;
    p["ended"] = ended_;
  }
  return envelope("hello", p);
}

Session::Reply Session::handle(std::string_view text) {
  Reply r;
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error &) {
    r.to_sender.push_back(error_message("malformed message: not JSON"));
    return r;
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    r.to_sender.push_back(error_message("malformed message: missing type"));
    return r;
  }
  const auto type = j["type"].get<std::string>();
  const ordered_json payload = j.contains("payload") ? j["payload"] : ordered_json::object();
  if (!payload.is_object()) {
    r.to_sender.push_back(error_message("malformed message: payload must be an object"));
    return r;
  }

  if (type == "subscribe") {
    r.subscribe = true;
    return r;
  }
  if (type == "unsubscribe") {
    r.unsubscribe = true;
    return r;
  }
  if (type == "set_var") {
    if (!payload.contains("name") || !payload["name"].is_string() || !payload.contains("value") ||
        !payload["value"].is_number_integer()) {
      r.to_sender.push_back(error_message("malformed set_var: needs string name and integer value"));
      return r;
    }
    const auto name = payload["name"].get<std::string>();
    const auto value = payload["value"].get<store::Value>();
    const auto var = cs_->variable(name);
    if (!var) {
      r.to_sender.push_back(error_message("unknown variable " + name));
      return r;
    }
    const auto &decl = cs_->program->vocab.decl(*var);
    if (value < decl.lo || value > decl.hi) {
      r.to_sender.push_back(error_message("value " + std::to_string(value) + " for " + name +
                                          " is outside [" + std::to_string(decl.lo) + ", " +
                                          std::to_string(decl.hi) + "]"));
      return r;
    }
    std::lock_guard lock(mu_);
    inbox_.push_back({Command::Kind::SetVar, name, value});
    return r;
  }
  if (type == "transport") {
    const auto action = payload.contains("action") && payload["action"].is_string()
                            ? payload["action"].get<std::string>()
                            : std::string();
    Command c{Command::Kind::Start, {}, 0};
    if (action == "start")
      c.kind = Command::Kind::Start;
    else if (action == "stop")
      c.kind = Command::Kind::Stop;
    else if (action == "reset")
      c.kind = Command::Kind::Reset;
    else {
      r.to_sender.push_back(error_message("transport action must be start, stop or reset"));
      return r;
    }
    std::lock_guard lock(mu_);
    if (c.kind == Command::Kind::Start && ended_) {
      r.to_sender.push_back(error_message("session has ended; reset first"));
      return r;
    }
    inbox_.push_back(std::move(c));
    return r;
  }
  r.to_sender.push_back(error_message("unknown message type " + type));
  return r;
}

Session::Output Session::boundary() {
  Output out;
  std::deque<Command> inbox;
  std::function<void(std::uint64_t)> hook;
  {
    std::lock_guard lock(mu_);
    inbox.swap(inbox_);
    hook = before_step_;
  }

  // Values set in this window, to detect conflicting writes.
  std::vector<std::pair<std::string, store::Value>> window;
  bool reset = false;
  bool playing;
  {
    std::lock_guard lock(mu_);
    playing = playing_;
  }
  for (const auto &c : inbox) {
    switch (c.kind) {
    case Command::Kind::SetVar: {
      auto w = std::find_if(window.begin(), window.end(), [&](const auto &p) { return p.first == c.name; });
      if (w == window.end()) {
        window.emplace_back(c.name, c.value);
      } else {
        if (w->second != c.value)
          pending_warnings_.push_back("set_var conflict on " + c.name + ": " + std::to_string(w->second) +
                                      " then " + std::to_string(c.value) + ", keeping " +
                                      std::to_string(c.value));
        w->second = c.value;
      }
      auto h = std::find_if(held_.begin(), held_.end(), [&](const auto &p) { return p.first == c.name; });
      if (h == held_.end())
        held_.emplace_back(c.name, c.value);
      else
        h->second = c.value;
      break;
    }
    case Command::Kind::Start:
      playing = true;
      break;
    case Command::Kind::Stop:
      playing = false;
      break;
    case Command::Kind::Reset:
      runner_.reset();
      held_.clear();
      window.clear();
      pending_warnings_.clear();
      playing = false;
      reset = true;
      break;
    }
  }
  {
    std::lock_guard lock(mu_);
    playing_ = playing;
    if (reset) {
      ended_ = false;
      unit_ = 0;
    }
    if (ended_)
      playing_ = playing = false;
  }
  if (reset)
    out.to_all.push_back(hello());
  if (!playing)
    return out;

  if (hook)
    hook(runner_.unit());
  try {
    const auto t0 = std::chrono::steady_clock::now();
    auto rec = runner_.step(held_);
    out.compute_us =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count();
    rec.warnings.insert(rec.warnings.end(), pending_warnings_.begin(), pending_warnings_.end());
    pending_warnings_.clear();
    out.stepped = true;
    out.to_subscribers.push_back(envelope("tick", runtime::to_json(rec, *cs_)));
    std::lock_guard lock(mu_);
    unit_ = runner_.unit();
    if (runner_.ended()) {
      ended_ = true;
      playing_ = false;
      out.to_subscribers.push_back(envelope("ended", {{"unit", rec.unit}}));
    }
  } catch (const ntcc::EngineError &e) {
    out.to_all.push_back(error_message(e.what()));
    out.to_all.push_back(envelope("ended", {{"unit", e.unit}}));
    std::lock_guard lock(mu_);
    ended_ = true;
    playing_ = false;
  }
  return out;
}

} // namespace branchscore::live
