#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace branchscore::store {

using Value = std::int64_t;

/// Index of a variable inside a Vocabulary.
struct VarId {
  std::uint32_t index = 0;
  friend bool operator==(VarId, VarId) = default;
  friend auto operator<=>(VarId, VarId) = default;
};

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Truth {
  friend bool operator==(const Truth &, const Truth &) = default;
};

struct Atom {
  VarId var;
  RelOp op = RelOp::Eq;
  Value k = 0;
  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Constraint;

struct And {
  std::vector<Constraint> items;
  friend bool operator==(const And &, const And &) = default;
};

struct Or {
  std::vector<Constraint> items;
  friend bool operator==(const Or &, const Or &) = default;
};

/// |{v in vars : v = 1}| = k
struct CountEq {
  std::vector<VarId> vars;
  Value k = 0;
  friend bool operator==(const CountEq &, const CountEq &) = default;
};

struct Constraint {
  std::variant<Truth, Atom, And, Or, CountEq> node;
  friend bool operator==(const Constraint &, const Constraint &) = default;
};

inline Constraint truth() { return {Truth{}}; }
inline Constraint atom(VarId v, RelOp op, Value k) { return {Atom{v, op, k}}; }
inline Constraint eq(VarId v, Value k) { return atom(v, RelOp::Eq, k); }
inline Constraint ne(VarId v, Value k) { return atom(v, RelOp::Ne, k); }
inline Constraint lt(VarId v, Value k) { return atom(v, RelOp::Lt, k); }
inline Constraint le(VarId v, Value k) { return atom(v, RelOp::Le, k); }
inline Constraint gt(VarId v, Value k) { return atom(v, RelOp::Gt, k); }
inline Constraint ge(VarId v, Value k) { return atom(v, RelOp::Ge, k); }
Constraint all_of(std::vector<Constraint> items);
Constraint any_of(std::vector<Constraint> items);
Constraint count_eq(std::vector<VarId> vars, Value k);

/// Atom, Truth, or And of those: the forms a store can absorb.
bool is_tellable(const Constraint &c);

/// Variables referenced by c, deduplicated, in first-occurrence order.
std::vector<VarId> variables_of(const Constraint &c);

bool holds(RelOp op, Value lhs, Value rhs);
const char *to_string(RelOp op);

} // namespace branchscore::store
