#include "branchscore/score/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace branchscore::score {

namespace {

constexpr std::string_view kReserved[] = {"true", "count", "active"};

class Checker {
public:
  explicit Checker(const Score &s) : s_(s) {}

  std::vector<ScoreDiagnostic> run() {
    check_ids();
    check_variables();
    check_intervals();
    check_behaviors();
    check_hierarchy();
    check_reachability();
    check_zero_cycles();
    return std::move(out_);
  }

private:
  void error(std::string code, std::string msg) {
    out_.push_back({Severity::Error, std::move(code), std::move(msg)});
  }
  void warning(std::string code, std::string msg) {
    out_.push_back({Severity::Warning, std::move(code), std::move(msg)});
  }
  void note(std::string code, std::string msg) {
    out_.push_back({Severity::Note, std::move(code), std::move(msg)});
  }

  bool has_point(const std::string &id) const { return points_.count(id) > 0; }

  void check_ids() {
    for (const auto &p : s_.points) {
      if (!is_identifier(p.id))
        error("bad-id", "invalid point id '" + p.id + "'");
      if (!points_.insert(p.id).second)
        error("duplicate-point", "duplicate point " + p.id);
    }
    std::set<std::string> ids;
    std::map<std::pair<std::string, std::string>, std::string> edges;
    for (const auto &i : s_.intervals) {
      if (!is_identifier(i.id))
        error("bad-id", "invalid interval id '" + i.id + "'");
      if (!ids.insert(i.id).second)
        error("duplicate-interval", "duplicate interval id " + i.id);
      auto [it, fresh] = edges.emplace(std::make_pair(i.src, i.dst), i.id);
      if (!fresh)
        error("duplicate-interval", "intervals " + it->second + " and " + i.id +
                                        " both connect " + i.src + " to " + i.dst);
    }
    if (s_.start.empty() || !has_point(s_.start))
      error("dangling-point", "start point '" + s_.start + "' is not declared");
    if (s_.end && !has_point(*s_.end))
      error("dangling-point", "end point '" + *s_.end + "' is not declared");
  }

  void check_variables() {
    auto declare = [&](const VarDecl &v, const std::string &owner) {
      if (!is_identifier(v.name) ||
          std::find(std::begin(kReserved), std::end(kReserved), v.name) != std::end(kReserved))
        error("bad-id", "invalid variable name '" + v.name + "' in " + owner);
      if (v.lo > v.hi)
        error("bad-variable", "variable " + v.name + " has empty range [" +
                                  std::to_string(v.lo) + ", " + std::to_string(v.hi) + "]");
      if (!vars_.insert(v.name).second)
        error("duplicate-variable", "variable " + v.name + " declared more than once");
    };
    for (const auto &v : s_.variables)
      declare(v, "score");
    for (const auto &i : s_.intervals)
      for (const auto &v : i.vars)
        declare(v, i.id);
  }

  void check_condition(const Condition &c, const std::string &where) {
    for (const auto &name : names_of(c)) {
      if (vars_.count(name))
        continue;
      if (name.size() > 8 && name.rfind("active(", 0) == 0 && name.back() == ')') {
        const auto p = name.substr(7, name.size() - 8);
        if (!has_point(p))
          error("dangling-point", where + " refers to undeclared point " + p);
        continue;
      }
      error("unknown-variable", where + " refers to undeclared variable " + name);
    }
  }

  void check_intervals() {
    for (const auto &i : s_.intervals) {
      const std::string where = std::string(to_string(i.kind)) + " " + i.id;
      if (!has_point(i.src))
        error("dangling-point", where + " starts at undeclared point " + i.src);
      if (!has_point(i.dst))
        error("dangling-point", where + " ends at undeclared point " + i.dst);
      if (i.src == i.dst)
        error("self-loop", where + " starts and ends at " + i.src);
      if (i.duration < 0)
        error("negative-duration", where + " has negative duration");
      check_condition(i.condition, where);

      if (i.kind == IntervalKind::Relation) {
        if (i.interpretation == Interpretation::Unless)
          error("unless-interpretation",
                where + " uses the unless interpretation, which is not supported at runtime");
        if (!i.children.empty() || !i.vars.empty() || i.proc != kSilence || !i.local.is_true() ||
            !i.params.empty())
          error("tcr-fields", where + " carries temporal-object fields");
        if (i.duration_class.kind != DurationClass::Kind::Flexible)
          error("tcr-fields", where + " has a duration class");
        continue;
      }

      if (!i.condition.is_true() || i.interpretation != Interpretation::When)
        error("to-fields", where + " carries relation fields (condition or interpretation)");
      check_condition(i.local, where);
      if (!i.local.is_true())
        note("local-constraint", where + " has a local constraint; it is checked, not enforced");

      const auto &dc = i.duration_class;
      if (dc.kind == DurationClass::Kind::Rigid && (dc.lo > dc.hi || i.duration < dc.lo || i.duration > dc.hi))
        error("duration-class", where + " duration " + std::to_string(i.duration) +
                                    " is outside its rigid bounds [" + std::to_string(dc.lo) + ", " +
                                    std::to_string(dc.hi) + "]");
      if (dc.kind == DurationClass::Kind::SemiRigid && i.duration < dc.lo)
        error("duration-class", where + " duration " + std::to_string(i.duration) +
                                    " is below its minimum " + std::to_string(dc.lo));
    }
  }

  void check_behaviors() {
    for (const auto &p : s_.points)
      if (p.pre == PreBehavior::WaitForAll && p.post == PostBehavior::Choice)
        error("unsupported-behavior",
              "point " + p.id + " combines wait-for-all with choice, which is not supported");
  }

  // Transfer edges: every interval except temporal objects with children.
  bool transfers(const IntervalSpec &i) const {
    return !(i.kind == IntervalKind::Object && !i.children.empty());
  }

  std::set<std::string> reachable_from(const std::vector<std::string> &roots) const {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto &i : s_.intervals)
      if (transfers(i))
        adj[i.src].push_back(i.dst);
    std::set<std::string> seen(roots.begin(), roots.end());
    std::vector<std::string> stack(roots.begin(), roots.end());
    while (!stack.empty()) {
      auto p = stack.back();
      stack.pop_back();
      for (const auto &q : adj[p])
        if (seen.insert(q).second)
          stack.push_back(q);
    }
    return seen;
  }

  void check_hierarchy() {
    std::map<std::string, std::string> parent;
    for (const auto &i : s_.intervals) {
      if (i.kind != IntervalKind::Object)
        continue;
      for (const auto &c : i.children) {
        const auto *child = s_.interval(c);
        if (!child || child->kind != IntervalKind::Object) {
          error("hierarchy-coherence", "TO " + i.id + " lists " + c + ", which is not a temporal object");
          continue;
        }
        if (c == i.id) {
          error("hierarchy-coherence", "TO " + i.id + " contains itself");
          continue;
        }
        auto [it, fresh] = parent.emplace(c, i.id);
        if (!fresh) {
          error("hierarchy-coherence", "TO " + c + " has two parents, " + it->second + " and " + i.id);
          continue;
        }
        if (!has_point(i.src) || !has_point(i.dst) || !has_point(child->src) || !has_point(child->dst))
          continue;
        if (!reachable_from({i.src}).count(child->src))
          error("hierarchy-coherence", "TO " + c + " can start before its parent " + i.id);
        if (!reachable_from({child->dst}).count(i.dst))
          error("hierarchy-coherence", "TO " + c + " is not followed by the end of its parent " + i.id);
      }
    }
    // Containment cycles.
    for (const auto &[child, _] : parent) {
      std::set<std::string> seen{child};
      for (auto it = parent.find(child); it != parent.end(); it = parent.find(it->second)) {
        if (!seen.insert(it->second).second) {
          error("hierarchy-coherence", "containment cycle through " + child);
          break;
        }
      }
    }
  }

  void check_reachability() {
    std::set<std::string> targets;
    for (const auto &i : s_.intervals)
      if (transfers(i))
        targets.insert(i.dst);
    for (const auto &p : s_.points)
      if (p.id != s_.start && !targets.count(p.id)) {
        bool bounds_container = false;
        for (const auto &i : s_.intervals)
          if (!transfers(i) && (i.src == p.id || i.dst == p.id))
            bounds_container = true;
        warning("unreachable-point", "point " + p.id + " has no incoming interval" +
                                         (bounds_container ? " and only bounds a container" : ""));
      }

    std::vector<std::string> choices;
    for (const auto &p : s_.points)
      if (p.post == PostBehavior::Choice)
        choices.push_back(p.id);
    if (choices.empty())
      return;
    const auto after_choice = reachable_from(choices);
    for (const auto &i : s_.intervals) {
      if (i.kind != IntervalKind::Object || i.duration_class.kind == DurationClass::Kind::Flexible)
        continue;
      if (after_choice.count(i.src))
        warning("best-effort-duration",
                "TO " + i.id + " follows a choice point; its " +
                    (i.duration_class.kind == DurationClass::Kind::Rigid ? "rigid" : "semi-rigid") +
                    " duration is honored on a best-effort basis");
    }
  }

  void check_zero_cycles() {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto &i : s_.intervals)
      if (transfers(i) && i.duration == 0)
        adj[i.src].push_back(i.dst);
    std::map<std::string, int> state; // 1 on stack, 2 done
    std::function<bool(const std::string &)> dfs = [&](const std::string &p) {
      state[p] = 1;
      for (const auto &q : adj[p]) {
        if (state[q] == 1)
          return true;
        if (state[q] == 0 && dfs(q))
          return true;
      }
      state[p] = 2;
      return false;
    };
    for (const auto &[p, _] : adj)
      if (state[p] == 0 && dfs(p)) {
        warning("zero-duration-cycle", "a cycle of zero-duration intervals passes through " + p);
        return;
      }
  }

  const Score &s_;
  std::set<std::string> points_;
  std::set<std::string> vars_;
  std::vector<ScoreDiagnostic> out_;
};

} // namespace

std::vector<ScoreDiagnostic> validate_score(const Score &s) { return Checker(s).run(); }

bool has_errors(const std::vector<ScoreDiagnostic> &ds) {
  return count(ds, Severity::Error) > 0;
}

std::size_t count(const std::vector<ScoreDiagnostic> &ds, Severity sev) {
  return static_cast<std::size_t>(
      std::count_if(ds.begin(), ds.end(), [&](const auto &d) { return d.severity == sev; }));
}

const char *to_string(Severity s) {
  switch (s) {
  case Severity::Error:
    return "error";
  case Severity::Warning:
    return "warning";
  case Severity::Note:
    return "note";
  }
  return "?";
}

std::string format(const ScoreDiagnostic &d) {
  return std::string(to_string(d.severity)) + "[" + d.code + "]: " + d.message;
}

bool is_identifier(std::string_view s) {
  if (s.empty())
    return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front()))
    return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

} // namespace branchscore::score
