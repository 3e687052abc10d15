#pragma once

#include "branchscore/score/score.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace branchscore::format {

/// Malformed score text. line and column are 1-based; 0 when unknown.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string &msg, std::size_t line_no, std::size_t column_no);
  std::size_t line;
  std::size_t column;
  std::string detail; // message without the position prefix
};

/// The file could not be read.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Condition text, e.g. `finish`, `!finish`, `x >= 2 && (y == 1 || z)`,
/// `count(a, b, c) == 1`, `active(s_b)`. Column is 1-based in `text`.
class ConditionError : public std::runtime_error {
public:
  ConditionError(const std::string &msg, std::size_t column_no)
      : std::runtime_error(msg), column(column_no) {}
  std::size_t column;
};

score::Condition parse_condition(std::string_view text);
std::string to_string(const score::Condition &c);

score::Score parse_score(std::string_view text);
score::Score load_score(const std::filesystem::path &path);
/// Canonical form: sorted by id, every field explicit, two-space indent,
/// trailing newline.
std::string serialize_score(const score::Score &s);

/// Fan-out tree of depth n into a binary join tree: 3*2^n - 2 points,
/// 2^(n+2) - 4 unit-length relations. Valid for 1 <= n <= 16.
score::Score generate_benchmark(int n);

} // namespace branchscore::format
