#pragma once

// The loop example written out by hand as an ntcc program, process by
// process, without the score compiler. Serves as a fixed reference for it.

#include "branchscore/score/compile.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace branchscore::testing {

/// Points, and (src, dst) transfers, that hold in one unit.
struct SystemUnit {
  std::set<std::string> active;
  std::set<std::pair<std::string, std::string>> transfers;
  friend bool operator==(const SystemUnit &, const SystemUnit &) = default;
};

/// System_n = User_n(0) || TCRs || Points. User_n tells finish = 0 before
/// unit n and finish = 1 from unit n on, counting units in `uclock`.
ntcc::Program literal_system(store::Value n);

std::vector<SystemUnit> run_literal_system(store::Value n, std::size_t units);

/// The compiled example with the same User_n process put in parallel.
ntcc::Program with_user(const score::CompiledScore &cs, store::Value n);

SystemUnit system_unit(const score::CompiledScore &cs, const ntcc::TickResult &tick);

} // namespace branchscore::testing
