#include "branchscore/store/constraint.hpp"

#include <algorithm>

namespace branchscore::store {

Constraint all_of(std::vector<Constraint> items) {
  if (items.size() == 1)
    return std::move(items.front());
  return {And{std::move(items)}};
}

Constraint any_of(std::vector<Constraint> items) {
  if (items.size() == 1)
    return std::move(items.front());
  return {Or{std::move(items)}};
}

Constraint count_eq(std::vector<VarId> vars, Value k) {
  return {CountEq{std::move(vars), k}};
}

bool is_tellable(const Constraint &c) {
  if (std::holds_alternative<Truth>(c.node) ||
      std::holds_alternative<Atom>(c.node))
    return true;
  if (const auto *a = std::get_if<And>(&c.node))
    return std::all_of(a->items.begin(), a->items.end(), is_tellable);
  return false;
}

namespace {

void collect(const Constraint &c, std::vector<VarId> &out) {
  auto add = [&](VarId v) {
    if (std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  };
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Atom>) {
          add(n.var);
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          for (const auto &item : n.items)
            collect(item, out);
        } else if constexpr (std::is_same_v<T, CountEq>) {
          for (auto v : n.vars)
            add(v);
        }
      },
      c.node);
}

} // namespace

std::vector<VarId> variables_of(const Constraint &c) {
  std::vector<VarId> out;
  collect(c, out);
  return out;
}

bool holds(RelOp op, Value lhs, Value rhs) {
  switch (op) {
  case RelOp::Eq:
    return lhs == rhs;
  case RelOp::Ne:
    return lhs != rhs;
  case RelOp::Lt:
    return lhs < rhs;
  case RelOp::Le:
    return lhs <= rhs;
  case RelOp::Gt:
    return lhs > rhs;
  case RelOp::Ge:
    return lhs >= rhs;
  }
  return false;
}

const char *to_string(RelOp op) {
  switch (op) {
  case RelOp::Eq:
    return "==";
  case RelOp::Ne:
    return "!=";
  case RelOp::Lt:
    return "<";
  case RelOp::Le:
    return "<=";
  case RelOp::Gt:
    return ">";
  case RelOp::Ge:
    return ">=";
  }
  return "?";
}

} // namespace branchscore::store
