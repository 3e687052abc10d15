#pragma once

// Naive reference evaluator for sum-free ntcc programs. Shares only the
// syntax tree with the engine: its store is an explicit value set per
// variable and its fixpoint re-scans every pending agent until nothing moves.

#include "branchscore/ntcc/engine.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace branchscore::testing {

using ValueSet = std::set<store::Value>;

struct RefUnit {
  std::vector<ValueSet> domains; // indexed by VarId
  std::vector<ntcc::Event> events;
};

struct RefOutcome {
  std::vector<RefUnit> units;
  std::optional<std::size_t> fault_unit; // unit whose tell emptied a domain
};

/// Domains are explicit [lo, hi] ranges taken from the vocabulary, so keep
/// them small. Sum, Call, Exclusive and Release are not supported.
RefOutcome reference_run(const ntcc::Program &program,
                         const std::vector<std::vector<store::Constraint>> &envs,
                         std::size_t units);

/// Engine result rendered in the same shape as reference_run.
RefOutcome engine_run(std::shared_ptr<const ntcc::Program> program,
                      const std::vector<std::vector<store::Constraint>> &envs,
                      std::size_t units, ntcc::EngineOptions options = {});

/// Explicit value set of a domain (small domains only).
ValueSet values_of(const store::Domain &d);

/// Brute force: does c hold for every assignment drawn from `domains`?
bool holds_everywhere(const store::Constraint &c, const std::vector<ValueSet> &domains);

/// c under one full assignment.
bool satisfied(const store::Constraint &c, const std::vector<store::Value> &assignment);

} // namespace branchscore::testing
