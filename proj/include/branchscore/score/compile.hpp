#pragma once

#include "branchscore/ntcc/engine.hpp"
#include "branchscore/score/validate.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace branchscore::score {

class CompileError : public std::runtime_error {
public:
  CompileError(const std::string &what, std::vector<ScoreDiagnostic> ds)
      : std::runtime_error(what), diagnostics(std::move(ds)) {}
  std::vector<ScoreDiagnostic> diagnostics;
};

struct CompileSummary {
  std::size_t choice_points = 0;
  std::size_t wait_for_all_points = 0;
  std::size_t jump_to_all_points = 0;
  std::size_t interval_agents = 0; // including the start token
  std::size_t definitions = 0;
  std::size_t variables = 0;
  friend bool operator==(const CompileSummary &, const CompileSummary &) = default;
};

struct CompiledScore {
  struct Transfer {
    std::string interval;
    std::string src;
    std::string dst;
  };

  Score score;
  std::shared_ptr<const ntcc::Program> program;
  CompileSummary summary;

  // Observable layout: one entry per point, then per transfer, then per
  // declared variable, each in score order.
  std::vector<std::string> points;
  std::vector<Transfer> transfers;
  std::vector<VarDecl> variables;
  std::optional<std::size_t> end_index; // into `points`

  std::size_t point_offset() const { return 0; }
  std::size_t transfer_offset() const { return points.size(); }
  std::size_t variable_offset() const { return points.size() + transfers.size(); }

  /// Declared score variable by name.
  std::optional<store::VarId> variable(std::string_view name) const;
};

/// Variable names used in the compiled vocabulary.
std::string active_var(std::string_view point);
std::string arrived_var(std::string_view at, std::string_view from);
std::string transferred_var(std::string_view to, std::string_view from);
std::string predec_var(std::string_view at, std::string_view from);
std::string succ_var(std::string_view from, std::string_view to);
inline constexpr const char *kStartToken = "start";

/// Throws CompileError if validate_score reports errors.
CompiledScore compile_score(const Score &s);

} // namespace branchscore::score
