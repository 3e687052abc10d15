#include "branchscore/ntcc/engine.hpp"

#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace branchscore::ntcc {

namespace {

struct CallSite {
  const Agent::Call *call;
  bool guarded; // lies under a Next / Unless / positive Delay
};

void collect_calls(const Agent *a, bool guarded, std::vector<CallSite> &out,
                   std::unordered_set<const Agent *> &seen_guarded,
                   std::unordered_set<const Agent *> &seen_unguarded) {
  auto &seen = guarded ? seen_guarded : seen_unguarded;
  if (!a || !seen.insert(a).second)
    return;
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        auto recurse = [&](const AgentPtr &child, bool g) {
          collect_calls(child.get(), g, out, seen_guarded, seen_unguarded);
        };
        if constexpr (std::is_same_v<T, Agent::Call>) {
          out.push_back({&n, guarded});
        } else if constexpr (std::is_same_v<T, Agent::Next> ||
                             std::is_same_v<T, Agent::Unless>) {
          recurse(n.body, true);
        } else if constexpr (std::is_same_v<T, Agent::Delay>) {
          const bool positive = n.ticks.is_literal() && n.ticks.literal() > 0;
          recurse(n.body, guarded || positive);
        } else if constexpr (std::is_same_v<T, Agent::Par>) {
          for (const auto &i : n.items)
            recurse(i, guarded);
        } else if constexpr (std::is_same_v<T, Agent::Sum>) {
          for (const auto &b : n.branches)
            recurse(b.body, guarded);
        } else if constexpr (requires { n.body; }) {
          recurse(n.body, guarded);
        }
      },
      a->node);
}

std::vector<CallSite> calls_of(const AgentPtr &a) {
  std::vector<CallSite> out;
  std::unordered_set<const Agent *> g, u;
  collect_calls(a.get(), false, out, g, u);
  return out;
}

} // namespace

std::vector<Diagnostic> validate_program(const std::vector<Definition> &defs,
                                         const AgentPtr &main) {
  std::vector<Diagnostic> diags;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!defs[i].body)
      diags.push_back({"definition " + defs[i].name + " has no body"});
    if (!index.emplace(defs[i].name, i).second)
      diags.push_back({"duplicate definition " + defs[i].name});
  }
  if (!main)
    diags.push_back({"main process is missing"});

  auto check_sites = [&](const std::vector<CallSite> &sites, const std::string &where) {
    for (const auto &s : sites) {
      auto it = index.find(s.call->name);
      if (it == index.end()) {
        diags.push_back({"unresolved call " + s.call->name + " in " + where});
      } else if (defs[it->second].arity != s.call->args.size()) {
        diags.push_back({"arity mismatch calling " + s.call->name + " in " + where +
                         ": expected " + std::to_string(defs[it->second].arity) +
                         ", got " + std::to_string(s.call->args.size())});
      }
    }
  };

  // Unguarded call graph between definitions.
  std::vector<std::vector<std::size_t>> edges(defs.size());
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!defs[i].body)
      continue;
    auto sites = calls_of(defs[i].body);
    check_sites(sites, defs[i].name);
    for (const auto &s : sites) {
      auto it = index.find(s.call->name);
      if (!s.guarded && it != index.end())
        edges[i].push_back(it->second);
    }
  }
  if (main)
    check_sites(calls_of(main), "main");

  // Cycle detection: 0 = unvisited, 1 = on stack, 2 = done.
  std::vector<int> color(defs.size(), 0);
  std::unordered_set<std::size_t> reported;
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    color[v] = 1;
    for (auto w : edges[v]) {
      if (color[w] == 1) {
        if (reported.insert(w).second)
          diags.push_back({"unguarded recursion at " + defs[w].name});
      } else if (color[w] == 0) {
        dfs(w);
      }
    }
    color[v] = 2;
  };
  for (std::size_t i = 0; i < defs.size(); ++i)
    if (color[i] == 0)
      dfs(i);
  return diags;
}

} // namespace branchscore::ntcc
