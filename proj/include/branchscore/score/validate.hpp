#pragma once

#include "branchscore/score/score.hpp"

#include <string>
#include <vector>

namespace branchscore::score {

enum class Severity { Error, Warning, Note };

struct ScoreDiagnostic {
  Severity severity = Severity::Error;
  /// Stable kebab-case code, e.g. "duplicate-interval".
  std::string code;
  std::string message;
  friend bool operator==(const ScoreDiagnostic &, const ScoreDiagnostic &) = default;
};

/// Structural checks: references, hierarchy, unsupported features and
/// best-effort durations. Errors make a score uncompilable.
std::vector<ScoreDiagnostic> validate_score(const Score &s);

bool has_errors(const std::vector<ScoreDiagnostic> &ds);
std::size_t count(const std::vector<ScoreDiagnostic> &ds, Severity sev);

/// "error[code]: message"
std::string format(const ScoreDiagnostic &d);
const char *to_string(Severity s);

/// Identifier syntax for points, intervals and variables.
bool is_identifier(std::string_view s);

} // namespace branchscore::score
