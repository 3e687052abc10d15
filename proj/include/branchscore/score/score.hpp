#pragma once

#include "branchscore/store/store.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace branchscore::score {

using store::RelOp;
using store::Value;
using store::VarDecl;

enum class PreBehavior { WaitForAll, WaitForFirst };  // WA, WF
enum class PostBehavior { Choice, NoChoice };         // CH, NCH

struct PointSpec {
  std::string id;
  PreBehavior pre = PreBehavior::WaitForFirst;
  PostBehavior post = PostBehavior::NoChoice;
  friend bool operator==(const PointSpec &, const PointSpec &) = default;
};

/// Boolean condition over named score variables. `active(p)` names the
/// activity flag of point p.
struct Condition {
  struct True {
    friend bool operator==(const True &, const True &) = default;
  };
  struct Ref {
    std::string name;
    RelOp op = RelOp::Ne;
    Value k = 0;
    friend bool operator==(const Ref &, const Ref &) = default;
  };
  struct All {
    std::vector<Condition> items;
    friend bool operator==(const All &, const All &) = default;
  };
  struct Any {
    std::vector<Condition> items;
    friend bool operator==(const Any &, const Any &) = default;
  };
  struct Count {
    std::vector<std::string> names;
    Value k = 0;
    friend bool operator==(const Count &, const Count &) = default;
  };
  std::variant<True, Ref, All, Any, Count> node;

  bool is_true() const { return std::holds_alternative<True>(node); }
  friend bool operator==(const Condition &, const Condition &) = default;
};

inline Condition always() { return {Condition::True{}}; }
inline Condition is_set(std::string name) { return {Condition::Ref{std::move(name), RelOp::Ne, 0}}; }
inline Condition is_unset(std::string name) { return {Condition::Ref{std::move(name), RelOp::Eq, 0}}; }

/// Names referenced by a condition, in first-occurrence order.
std::vector<std::string> names_of(const Condition &c);

enum class IntervalKind { Relation, Object }; // TCR, TO
enum class Interpretation { When, Unless };

struct DurationClass {
  enum class Kind { Flexible, Rigid, SemiRigid };
  Kind kind = Kind::Flexible;
  Value lo = 0; // Rigid, SemiRigid
  Value hi = 0; // Rigid
  friend bool operator==(const DurationClass &, const DurationClass &) = default;
};

inline constexpr const char *kSilence = "silence";

struct IntervalSpec {
  std::string id;
  IntervalKind kind = IntervalKind::Relation;
  std::string src;
  std::string dst;
  Condition condition = always();
  Value duration = 0; // ticks
  Interpretation interpretation = Interpretation::When;
  DurationClass duration_class;
  std::string proc = kSilence;
  std::vector<std::string> params;
  std::vector<std::string> children; // TO ids
  std::vector<VarDecl> vars;
  Condition local = always();
  friend bool operator==(const IntervalSpec &, const IntervalSpec &) = default;
};

struct Score {
  std::vector<PointSpec> points;
  std::vector<IntervalSpec> intervals;
  /// Score-wide variables not owned by any temporal object.
  std::vector<VarDecl> variables;
  std::string start;
  std::optional<std::string> end;
  friend bool operator==(const Score &, const Score &) = default;

  const PointSpec *point(std::string_view id) const;
  const IntervalSpec *interval(std::string_view id) const;
  /// Score variables followed by every TO's vars, in declaration order.
  std::vector<VarDecl> declared_variables() const;
};

/// Copy with points and intervals sorted by id.
Score canonical(Score s);

/// The looping scenario: silence A, sound B, lights D, video C, and a choice
/// at the end of C between looping back and ending, controlled by `finish`.
Score example_score();

const char *to_string(PreBehavior b);
const char *to_string(PostBehavior b);
const char *to_string(IntervalKind k);
const char *to_string(Interpretation i);

} // namespace branchscore::score
