#pragma once

#include "branchscore/store/constraint.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace branchscore::ntcc {

using store::Constraint;
using store::Value;
using store::VarId;

// ---------------------------------------------------------------------------
// Integer expressions over definition parameters.

struct IntExpr;
using IntExprPtr = std::shared_ptr<const IntExpr>;

enum class ArithOp { Add, Sub, Mul };

struct IntExpr {
  struct Const {
    Value v;
  };
  struct Param {
    std::size_t index;
  };
  struct Binary {
    ArithOp op;
    IntExprPtr lhs, rhs;
  };
  std::variant<Const, Param, Binary> node;
};

/// Integer term: either a literal or an expression over parameters.
class Term {
public:
  Term(Value v) : literal_(v) {} // NOLINT(google-explicit-constructor)
  Term(IntExprPtr e);            // NOLINT(google-explicit-constructor)

  bool is_literal() const { return !expr_; }
  Value literal() const { return literal_; }
  const IntExprPtr &expr() const { return expr_; }
  /// Throws std::overflow_error or std::out_of_range.
  Value eval(std::span<const Value> params) const;
  std::size_t max_param() const; // 1 + highest parameter index used

private:
  Value literal_ = 0;
  IntExprPtr expr_;
};

Term param(std::size_t index);
Term operator+(const Term &a, const Term &b);
Term operator-(const Term &a, const Term &b);
Term operator*(const Term &a, const Term &b);

// ---------------------------------------------------------------------------
// Constraint patterns: constraints whose constants may be parameter terms.

struct PatternNode;

struct Pattern {
  /// Ground patterns carry their constraint directly.
  Pattern(Constraint c); // NOLINT(google-explicit-constructor)
  Pattern(std::shared_ptr<const PatternNode> node);

  bool is_ground() const { return ground_.has_value(); }
  const Constraint &ground() const { return *ground_; }
  Constraint instantiate(std::span<const Value> params) const;
  const std::vector<VarId> &vars() const { return vars_; }
  std::size_t max_param() const;

private:
  std::optional<Constraint> ground_;
  std::shared_ptr<const PatternNode> node_;
  std::vector<VarId> vars_;
};

struct PatternNode {
  struct Atom {
    VarId var;
    store::RelOp op;
    Term k;
  };
  struct And {
    std::vector<Pattern> items;
  };
  struct Or {
    std::vector<Pattern> items;
  };
  std::variant<Atom, And, Or> node;
};

Pattern atom(VarId v, store::RelOp op, Term k);
Pattern all_of(std::vector<Pattern> items);
Pattern any_of(std::vector<Pattern> items);

// ---------------------------------------------------------------------------
// Agents.

struct Agent;
using AgentPtr = std::shared_ptr<const Agent>;

/// Host-visible event produced by an Emit agent (proc start/stop etc.).
struct Event {
  std::string kind;
  std::string name;
  std::vector<std::string> params;
  std::string tag;
  friend bool operator==(const Event &, const Event &) = default;
};

struct Agent {
  struct Skip {};
  struct Tell {
    Pattern c;
  };
  struct When {
    Pattern guard;
    AgentPtr body;
  };
  /// unless c next body
  struct Unless {
    Pattern guard;
    AgentPtr body;
  };
  struct Next {
    AgentPtr body;
  };
  /// next^ticks body; ticks == 0 runs body in the current unit.
  struct Delay {
    Term ticks;
    AgentPtr body;
  };
  struct Par {
    std::vector<AgentPtr> items;
  };
  struct Branch {
    Pattern guard;
    AgentPtr body;
  };
  struct Sum {
    std::vector<Branch> branches;
    std::string label;
  };
  struct Bang {
    AgentPtr body;
  };
  struct Call {
    std::string name;
    std::vector<Term> args;
  };
  struct Emit {
    Event event;
  };
  /// Runs body only if `key` is not held by an earlier, unreleased instance.
  struct Exclusive {
    Term key;
    AgentPtr body;
    std::string label;
  };
  struct Release {
    Term key;
  };

  std::variant<Skip, Tell, When, Unless, Next, Delay, Par, Sum, Bang, Call,
               Emit, Exclusive, Release>
      node;
};

AgentPtr skip();
AgentPtr tell(Pattern c);
AgentPtr when(Pattern guard, AgentPtr body);
AgentPtr unless(Pattern guard, AgentPtr body);
AgentPtr next(AgentPtr body);
AgentPtr next_n(std::size_t n, AgentPtr body); // literally nested Next
AgentPtr delay(Term ticks, AgentPtr body);
AgentPtr par(std::vector<AgentPtr> items);
AgentPtr sum(std::vector<Agent::Branch> branches, std::string label = {});
AgentPtr bang(AgentPtr body);
AgentPtr whenever(Pattern guard, AgentPtr body); // !when
AgentPtr call(std::string name, std::vector<Term> args = {});
AgentPtr emit(Event e);
AgentPtr exclusive(Term key, AgentPtr body, std::string label = {});
AgentPtr release(Term key);

/// Named parametric process definition.
struct Definition {
  std::string name;
  std::size_t arity = 0;
  AgentPtr body;
};

/// Number of syntax nodes reachable from a (without expanding calls).
std::size_t agent_size(const AgentPtr &a);

} // namespace branchscore::ntcc
