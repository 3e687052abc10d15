#include "branchscore/score/compile.hpp"

#include <algorithm>
#include <map>

namespace branchscore::score {

using ntcc::AgentPtr;
using store::Constraint;
using store::VarId;

std::string active_var(std::string_view point) {
  return "active(" + std::string(point) + ")";
}
std::string arrived_var(std::string_view at, std::string_view from) {
  return "arrived(" + std::string(at) + "," + std::string(from) + ")";
}
std::string transferred_var(std::string_view to, std::string_view from) {
  return "transferred(" + std::string(to) + "," + std::string(from) + ")";
}
std::string predec_var(std::string_view at, std::string_view from) {
  return "predec(" + std::string(at) + "," + std::string(from) + ")";
}
std::string succ_var(std::string_view from, std::string_view to) {
  return "succ(" + std::string(from) + "," + std::string(to) + ")";
}

std::optional<VarId> CompiledScore::variable(std::string_view name) const {
  for (const auto &v : variables)
    if (v.name == name)
      return program->vocab.find(name);
  return std::nullopt;
}

namespace {

// The start token is not an identifier, so it cannot clash with a point.
constexpr const char *kToken = "#start";

class Compiler {
public:
  explicit Compiler(const Score &s) : s_(s) {}

  CompiledScore run() {
    CompiledScore out;
    out.score = s_;
    declare_variables(out);
    auto program = std::make_shared<ntcc::Program>();
    program->vocab = vocab_;

    std::vector<AgentPtr> intervals, points;
    for (std::size_t k = 0; k < s_.intervals.size(); ++k) {
      const auto &i = s_.intervals[k];
      if (is_container(i)) {
        if (i.proc != kSilence)
          intervals.push_back(container_events(i));
        continue;
      }
      define("PredecessorsWait_" + i.id, predecessors_wait(i));
      define("I_" + i.id, interval_agent(i, static_cast<Value>(k)));
      intervals.push_back(ntcc::call("I_" + i.id));
      ++out.summary.interval_agents;
    }
    // Start token: an interval from outside the score into the start point.
    intervals.push_back(ntcc::bang(ntcc::par({tell1(predec_var(s_.start, kToken)),
                                             tell1(succ_var(kToken, s_.start))})));
    ++out.summary.interval_agents;

    for (const auto &p : s_.points) {
      auto agent = point_agent(p, out.summary);
      if (agent)
        points.push_back(std::move(agent));
    }

    define("TCRs", ntcc::par(std::move(intervals)));
    define("Points", ntcc::par(std::move(points)));
    program->defs = std::move(defs_);
    program->main = ntcc::par({ntcc::call("Points"), ntcc::call("TCRs"),
                               tell1(arrived_var(s_.start, kToken))});

    for (const auto &p : s_.points)
      program->observables.push_back(var(active_var(p.id)));
    for (const auto &i : s_.intervals)
      if (!is_container(i)) {
        program->observables.push_back(var(transferred_var(i.dst, i.src)));
        out.transfers.push_back({i.id, i.src, i.dst});
      }
    for (const auto &v : out.variables)
      program->observables.push_back(var(v.name));

    for (std::size_t k = 0; k < s_.points.size(); ++k) {
      out.points.push_back(s_.points[k].id);
      if (s_.end && s_.points[k].id == *s_.end)
        out.end_index = k;
    }
    out.summary.definitions = program->defs.size();
    out.summary.variables = program->vocab.size();
    out.program = std::move(program);
    return out;
  }

private:
  static bool is_container(const IntervalSpec &i) {
    return i.kind == IntervalKind::Object && !i.children.empty();
  }

  void declare_variables(CompiledScore &out) {
    out.variables = s_.declared_variables();
    for (const auto &v : out.variables)
      vocab_.declare(v);
    for (const auto &p : s_.points)
      vocab_.declare({active_var(p.id), 0, 1});
    auto flag = [&](const std::string &name) {
      if (!vocab_.find(name))
        vocab_.declare({name, 0, 1});
    };
    for (const auto &i : s_.intervals) {
      if (is_container(i))
        continue;
      flag(arrived_var(i.dst, i.src));
      flag(transferred_var(i.dst, i.src));
      flag(predec_var(i.dst, i.src));
      flag(succ_var(i.src, i.dst));
      arrivals_[i.dst].push_back(i.src);
      outgoing_[i.src].push_back(&i);
      incoming_[i.dst].push_back(&i);
    }
    flag(arrived_var(s_.start, kToken));
    flag(predec_var(s_.start, kToken));
    flag(succ_var(kToken, s_.start));
    arrivals_[s_.start].push_back(kToken);
  }

  VarId var(const std::string &name) const { return vocab_.at(name); }
  AgentPtr tell1(const std::string &name) const { return ntcc::tell(store::eq(var(name), 1)); }
  Constraint is1(const std::string &name) const { return store::eq(var(name), 1); }

  void define(std::string name, AgentPtr body) {
    defs_.push_back({std::move(name), 0, std::move(body)});
  }

  Constraint condition(const Condition &c) const {
    return std::visit(
        [&](const auto &n) -> Constraint {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Condition::True>) {
            return store::truth();
          } else if constexpr (std::is_same_v<T, Condition::Ref>) {
            return store::atom(var(n.name), n.op, n.k);
          } else if constexpr (std::is_same_v<T, Condition::Count>) {
            std::vector<VarId> vs;
            for (const auto &name : n.names)
              vs.push_back(var(name));
            return store::count_eq(std::move(vs), n.k);
          } else {
            std::vector<Constraint> items;
            for (const auto &item : n.items)
              items.push_back(condition(item));
            if constexpr (std::is_same_v<T, Condition::All>)
              return store::all_of(std::move(items));
            else
              return store::any_of(std::move(items));
          }
        },
        c.node);
  }

  // Some predecessor of p has arrived.
  Constraint any_arrival(const std::string &p) const {
    std::vector<Constraint> items;
    for (const auto &from : arrivals_.at(p))
      items.push_back(is1(arrived_var(p, from)));
    return store::any_of(std::move(items));
  }

  // Keeps the arrival at q alive until q becomes active.
  AgentPtr predecessors_wait(const IntervalSpec &i) const {
    return ntcc::unless(is1(active_var(i.dst)),
                        ntcc::par({ntcc::call("PredecessorsWait_" + i.id), tell1(arrived_var(i.dst, i.src))}));
  }

  AgentPtr interval_agent(const IntervalSpec &i, Value key) const {
    std::vector<AgentPtr> fin{ntcc::release(key), tell1(arrived_var(i.dst, i.src)),
                              ntcc::call("PredecessorsWait_" + i.id)};
    std::vector<AgentPtr> body;
    if (i.kind == IntervalKind::Object && i.proc != kSilence) {
      body.push_back(ntcc::emit({"start", i.proc, i.params, i.id}));
      fin.push_back(ntcc::emit({"stop", i.proc, i.params, i.id}));
    }
    body.push_back(ntcc::delay(i.duration, ntcc::par(std::move(fin))));

    std::vector<AgentPtr> parts{
        ntcc::bang(ntcc::par({tell1(predec_var(i.dst, i.src)), tell1(succ_var(i.src, i.dst))}))};
    if (arrivals_.count(i.src))
      parts.push_back(ntcc::whenever(
          store::all_of({is1(transferred_var(i.dst, i.src)), any_arrival(i.src)}),
          ntcc::exclusive(key, ntcc::par(std::move(body)), i.id)));
    return ntcc::par(std::move(parts));
  }

  AgentPtr container_events(const IntervalSpec &i) const {
    return ntcc::par({ntcc::whenever(is1(active_var(i.src)),
                                     ntcc::emit({"start", i.proc, i.params, i.id})),
                      ntcc::whenever(is1(active_var(i.dst)),
                                     ntcc::emit({"stop", i.proc, i.params, i.id}))});
  }

  Constraint enabled(const IntervalSpec &i) const {
    auto c = condition(i.condition);
    if (std::holds_alternative<store::Truth>(c.node))
      return is1(succ_var(i.src, i.dst));
    return store::all_of({is1(succ_var(i.src, i.dst)), std::move(c)});
  }

  AgentPtr to_all(const PointSpec &p) const {
    std::vector<AgentPtr> items{tell1(active_var(p.id))};
    if (outgoing_.count(p.id))
      for (const auto *i : outgoing_.at(p.id))
        items.push_back(ntcc::when(enabled(*i), tell1(transferred_var(i->dst, p.id))));
    return ntcc::par(std::move(items));
  }

  AgentPtr point_agent(const PointSpec &p, CompileSummary &summary) {
    if (!arrivals_.count(p.id))
      return nullptr;

    if (p.post == PostBehavior::Choice) {
      // Branch priority follows interval ids, so it survives canonical reordering.
      std::vector<const IntervalSpec *> out;
      if (outgoing_.count(p.id))
        out = outgoing_.at(p.id);
      std::sort(out.begin(), out.end(), [](auto *a, auto *b) { return a->id < b->id; });
      std::vector<ntcc::Agent::Branch> branches;
      for (const auto *i : out)
        branches.push_back({enabled(*i), tell1(transferred_var(i->dst, p.id))});
      std::vector<AgentPtr> body{tell1(active_var(p.id))};
      if (!branches.empty())
        body.push_back(ntcc::sum(std::move(branches), p.id));
      const auto name = "ChoicePoint_" + p.id;
      define(name, ntcc::whenever(any_arrival(p.id), ntcc::par(std::move(body))));
      ++summary.choice_points;
      return ntcc::call(name);
    }

    define("ToAll_" + p.id, to_all(p));
    if (p.pre == PreBehavior::WaitForAll) {
      std::vector<Constraint> all;
      if (incoming_.count(p.id))
        for (const auto *i : incoming_.at(p.id))
          all.push_back(store::all_of({is1(predec_var(p.id, i->src)), is1(arrived_var(p.id, i->src))}));
      std::vector<Constraint> ways;
      if (p.id == s_.start)
        ways.push_back(is1(arrived_var(p.id, kToken)));
      if (!all.empty())
        ways.push_back(store::all_of(std::move(all)));
      Constraint guard = store::any_of(std::move(ways));
      const auto name = "WaitForAllPoint_" + p.id;
      define(name, ntcc::whenever(std::move(guard), ntcc::call("ToAll_" + p.id)));
      ++summary.wait_for_all_points;
      return ntcc::call(name);
    }

    const auto name = "JumpToAllPoint_" + p.id;
    define(name, ntcc::whenever(any_arrival(p.id), ntcc::call("ToAll_" + p.id)));
    ++summary.jump_to_all_points;
    return ntcc::call(name);
  }

  const Score &s_;
  store::Vocabulary vocab_;
  std::vector<ntcc::Definition> defs_;
  std::map<std::string, std::vector<std::string>> arrivals_;
  std::map<std::string, std::vector<const IntervalSpec *>> outgoing_;
  std::map<std::string, std::vector<const IntervalSpec *>> incoming_;
};

} // namespace

CompiledScore compile_score(const Score &s) {
  auto ds = validate_score(s);
  if (has_errors(ds)) {
    std::string msg = "score has errors";
    for (const auto &d : ds)
      if (d.severity == Severity::Error) {
        msg += "\n  " + format(d);
      }
    throw CompileError(msg, std::move(ds));
  }
  // Points and intervals in id order, so the trace does not depend on file order.
  return Compiler(canonical(s)).run();
}

} // namespace branchscore::score
