#include "branchscore/ntcc/agent.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace branchscore::ntcc {

// ---------------------------------------------------------------------------
// Terms

Term::Term(IntExprPtr e) : expr_(std::move(e)) {
  if (const auto *c = std::get_if<IntExpr::Const>(&expr_->node)) {
    literal_ = c->v;
    expr_.reset();
  }
}

namespace {

Value eval_expr(const IntExpr &e, std::span<const Value> params) {
  return std::visit(
      [&](const auto &n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntExpr::Const>) {
          return n.v;
        } else if constexpr (std::is_same_v<T, IntExpr::Param>) {
          if (n.index >= params.size())
            throw std::out_of_range("parameter index " + std::to_string(n.index) +
                                    " out of range");
          return params[n.index];
        } else {
          const Value a = eval_expr(*n.lhs, params);
          const Value b = eval_expr(*n.rhs, params);
          Value out = 0;
          bool overflow = false;
          switch (n.op) {
          case ArithOp::Add:
            overflow = __builtin_add_overflow(a, b, &out);
            break;
          case ArithOp::Sub:
            overflow = __builtin_sub_overflow(a, b, &out);
            break;
          case ArithOp::Mul:
            overflow = __builtin_mul_overflow(a, b, &out);
            break;
          }
          if (overflow)
            throw std::overflow_error("integer overflow in parameter arithmetic");
          return out;
        }
      },
      e.node);
}

std::size_t expr_max_param(const IntExpr &e) {
  return std::visit(
      [](const auto &n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntExpr::Const>)
          return 0;
        else if constexpr (std::is_same_v<T, IntExpr::Param>)
          return n.index + 1;
        else
          return std::max(expr_max_param(*n.lhs), expr_max_param(*n.rhs));
      },
      e.node);
}

IntExprPtr as_expr(const Term &t) {
  if (t.is_literal())
    return std::make_shared<IntExpr>(IntExpr{IntExpr::Const{t.literal()}});
  return t.expr();
}

Term binary(ArithOp op, const Term &a, const Term &b) {
  return Term(std::make_shared<IntExpr>(
      IntExpr{IntExpr::Binary{op, as_expr(a), as_expr(b)}}));
}

} // namespace

Value Term::eval(std::span<const Value> params) const {
  return expr_ ? eval_expr(*expr_, params) : literal_;
}

std::size_t Term::max_param() const { return expr_ ? expr_max_param(*expr_) : 0; }

Term param(std::size_t index) {
  return Term(std::make_shared<IntExpr>(IntExpr{IntExpr::Param{index}}));
}

Term operator+(const Term &a, const Term &b) { return binary(ArithOp::Add, a, b); }
Term operator-(const Term &a, const Term &b) { return binary(ArithOp::Sub, a, b); }
Term operator*(const Term &a, const Term &b) { return binary(ArithOp::Mul, a, b); }

// ---------------------------------------------------------------------------
// Patterns

Pattern::Pattern(Constraint c) : ground_(std::move(c)) {
  vars_ = store::variables_of(*ground_);
}

Pattern::Pattern(std::shared_ptr<const PatternNode> node) : node_(std::move(node)) {
  std::vector<VarId> vars;
  auto add = [&](VarId v) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      vars.push_back(v);
  };
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PatternNode::Atom>) {
          add(n.var);
        } else {
          for (const auto &item : n.items)
            for (auto v : item.vars())
              add(v);
        }
      },
      node_->node);
  vars_ = std::move(vars);
  if (max_param() == 0) {
    ground_ = instantiate({});
    node_.reset();
  }
}

Constraint Pattern::instantiate(std::span<const Value> params) const {
  if (ground_)
    return *ground_;
  return std::visit(
      [&](const auto &n) -> Constraint {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PatternNode::Atom>) {
          return store::atom(n.var, n.op, n.k.eval(params));
        } else {
          std::vector<Constraint> items;
          items.reserve(n.items.size());
          for (const auto &item : n.items)
            items.push_back(item.instantiate(params));
          if constexpr (std::is_same_v<T, PatternNode::And>)
            return Constraint{store::And{std::move(items)}};
          else
            return Constraint{store::Or{std::move(items)}};
        }
      },
      node_->node);
}

std::size_t Pattern::max_param() const {
  if (ground_)
    return 0;
  return std::visit(
      [](const auto &n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PatternNode::Atom>) {
          return n.k.max_param();
        } else {
          std::size_t m = 0;
          for (const auto &item : n.items)
            m = std::max(m, item.max_param());
          return m;
        }
      },
      node_->node);
}

Pattern atom(VarId v, store::RelOp op, Term k) {
  if (k.is_literal())
    return Pattern(store::atom(v, op, k.literal()));
  return Pattern(std::make_shared<PatternNode>(PatternNode{PatternNode::Atom{v, op, k}}));
}

Pattern all_of(std::vector<Pattern> items) {
  if (items.empty())
    throw std::invalid_argument("And needs at least one member");
  if (items.size() == 1)
    return items.front();
  return Pattern(std::make_shared<PatternNode>(PatternNode{PatternNode::And{std::move(items)}}));
}

Pattern any_of(std::vector<Pattern> items) {
  if (items.empty())
    throw std::invalid_argument("Or needs at least one member");
  if (items.size() == 1)
    return items.front();
  return Pattern(std::make_shared<PatternNode>(PatternNode{PatternNode::Or{std::move(items)}}));
}

// ---------------------------------------------------------------------------
// Agent builders

namespace {
template <class T> AgentPtr make(T node) {
  return std::make_shared<const Agent>(Agent{std::move(node)});
}
void require(const AgentPtr &a, const char *what) {
  if (!a)
    throw std::invalid_argument(std::string(what) + ": null body");
}
} // namespace

AgentPtr skip() { return make(Agent::Skip{}); }
AgentPtr tell(Pattern c) { return make(Agent::Tell{std::move(c)}); }
AgentPtr when(Pattern guard, AgentPtr body) {
  require(body, "when");
  return make(Agent::When{std::move(guard), std::move(body)});
}
AgentPtr unless(Pattern guard, AgentPtr body) {
  require(body, "unless");
  return make(Agent::Unless{std::move(guard), std::move(body)});
}
AgentPtr next(AgentPtr body) {
  require(body, "next");
  return make(Agent::Next{std::move(body)});
}
AgentPtr next_n(std::size_t n, AgentPtr body) {
  for (std::size_t i = 0; i < n; ++i)
    body = next(std::move(body));
  return body;
}
AgentPtr delay(Term ticks, AgentPtr body) {
  require(body, "delay");
  return make(Agent::Delay{std::move(ticks), std::move(body)});
}
AgentPtr par(std::vector<AgentPtr> items) {
  for (const auto &a : items)
    require(a, "par");
  if (items.size() == 1)
    return items.front();
  return make(Agent::Par{std::move(items)});
}
AgentPtr sum(std::vector<Agent::Branch> branches, std::string label) {
  for (const auto &b : branches)
    require(b.body, "sum");
  return make(Agent::Sum{std::move(branches), std::move(label)});
}
AgentPtr bang(AgentPtr body) {
  require(body, "bang");
  return make(Agent::Bang{std::move(body)});
}
AgentPtr whenever(Pattern guard, AgentPtr body) {
  return bang(when(std::move(guard), std::move(body)));
}
AgentPtr call(std::string name, std::vector<Term> args) {
  return make(Agent::Call{std::move(name), std::move(args)});
}
AgentPtr emit(Event e) { return make(Agent::Emit{std::move(e)}); }
AgentPtr exclusive(Term key, AgentPtr body, std::string label) {
  require(body, "exclusive");
  return make(Agent::Exclusive{std::move(key), std::move(body), std::move(label)});
}
AgentPtr release(Term key) { return make(Agent::Release{std::move(key)}); }

std::size_t agent_size(const AgentPtr &root) {
  std::unordered_set<const Agent *> seen;
  std::vector<const Agent *> stack{root.get()};
  while (!stack.empty()) {
    const Agent *a = stack.back();
    stack.pop_back();
    if (!a || !seen.insert(a).second)
      continue;
    std::visit(
        [&](const auto &n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Agent::Par>) {
            for (const auto &i : n.items)
              stack.push_back(i.get());
          } else if constexpr (std::is_same_v<T, Agent::Sum>) {
            for (const auto &b : n.branches)
              stack.push_back(b.body.get());
          } else if constexpr (requires { n.body; }) {
            stack.push_back(n.body.get());
          }
        },
        a->node);
  }
  return seen.size();
}

} // namespace branchscore::ntcc
