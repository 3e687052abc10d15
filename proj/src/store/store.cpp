#include "branchscore/store/store.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace branchscore::store {

namespace {
constexpr Value kMin = std::numeric_limits<Value>::min();
constexpr Value kMax = std::numeric_limits<Value>::max();
} // namespace

// ---------------------------------------------------------------------------
// Domain

bool Domain::contains(Value v) const {
  if (v < lo_ || v > hi_)
    return false;
  return !std::binary_search(holes_.begin(), holes_.end(), v);
}

std::uint64_t Domain::size() const {
  if (empty())
    return 0;
  auto span = static_cast<std::uint64_t>(hi_) - static_cast<std::uint64_t>(lo_);
  if (span == std::numeric_limits<std::uint64_t>::max())
    return span;
  return span + 1 - holes_.size();
}

bool Domain::entails(RelOp op, Value k) const {
  if (empty())
    return true;
  switch (op) {
  case RelOp::Eq:
    return lo_ == k && hi_ == k;
  case RelOp::Ne:
    return !contains(k);
  case RelOp::Lt:
    return hi_ < k;
  case RelOp::Le:
    return hi_ <= k;
  case RelOp::Gt:
    return lo_ > k;
  case RelOp::Ge:
    return lo_ >= k;
  }
  return false;
}

bool Domain::restrict(RelOp op, Value k) {
  const Domain before = *this;
  switch (op) {
  case RelOp::Eq:
    if (contains(k)) {
      lo_ = hi_ = k;
      holes_.clear();
    } else {
      lo_ = 1;
      hi_ = 0;
      holes_.clear();
    }
    break;
  case RelOp::Ne:
    if (!contains(k))
      return false;
    if (k == lo_) {
      lo_ = k == kMax ? k : k + 1;
      if (k == kMax)
        hi_ = k - 1;
    } else if (k == hi_) {
      hi_ = k - 1;
    } else {
      holes_.insert(std::upper_bound(holes_.begin(), holes_.end(), k), k);
    }
    break;
  case RelOp::Lt:
    if (k == kMin) {
      lo_ = 1;
      hi_ = 0;
    } else {
      hi_ = std::min(hi_, k - 1);
    }
    break;
  case RelOp::Le:
    hi_ = std::min(hi_, k);
    break;
  case RelOp::Gt:
    if (k == kMax) {
      lo_ = 1;
      hi_ = 0;
    } else {
      lo_ = std::max(lo_, k + 1);
    }
    break;
  case RelOp::Ge:
    lo_ = std::max(lo_, k);
    break;
  }
  normalize();
  return !(*this == before);
}

void Domain::normalize() {
  if (empty()) {
    holes_.clear();
    return;
  }
  // Holes are sorted: trim from both ends while a bound sits on a hole.
  std::size_t first = 0;
  while (first < holes_.size() && holes_[first] <= lo_) {
    if (holes_[first] == lo_)
      ++lo_;
    ++first;
  }
  std::size_t last = holes_.size();
  while (last > first && holes_[last - 1] >= hi_) {
    if (holes_[last - 1] == hi_)
      --hi_;
    --last;
  }
  holes_.erase(holes_.begin() + static_cast<std::ptrdiff_t>(last), holes_.end());
  holes_.erase(holes_.begin(), holes_.begin() + static_cast<std::ptrdiff_t>(first));
  if (empty())
    holes_.clear();
}

// ---------------------------------------------------------------------------
// Vocabulary

VarId Vocabulary::declare(const VarDecl &decl) {
  if (decl.name.empty())
    throw StoreError("variable name must not be empty");
  if (decl.lo > decl.hi)
    throw StoreError("variable '" + decl.name + "' has lo > hi");
  if (index_.contains(decl.name))
    throw StoreError("duplicate variable '" + decl.name + "'");
  const auto id = static_cast<std::uint32_t>(decls_.size());
  decls_.push_back(decl);
  index_.emplace(decl.name, id);
  return VarId{id};
}

VarId Vocabulary::fresh(std::string_view prefix, Value lo, Value hi) {
  for (;;) {
    std::string name = std::string(prefix) + "#" + std::to_string(fresh_counter_++);
    if (!index_.contains(name))
      return declare({std::move(name), lo, hi});
  }
}

std::optional<VarId> Vocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    return std::nullopt;
  return VarId{it->second};
}

VarId Vocabulary::at(std::string_view name) const {
  if (auto v = find(name))
    return *v;
  throw StoreError("unknown variable '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Store

Store::Store(const Vocabulary &vocab) : vocab_(vocab) {
  domains_.reserve(vocab_.size());
  for (const auto &d : vocab_.decls())
    domains_.emplace_back(d.lo, d.hi);
  is_touched_.assign(domains_.size(), 0);
}

VarId Store::declare_var(const VarDecl &decl) {
  auto id = vocab_.declare(decl);
  domains_.emplace_back(decl.lo, decl.hi);
  is_touched_.push_back(0);
  return id;
}

void Store::check_declared(const Constraint &c) const {
  for (auto v : variables_of(c))
    if (v.index >= domains_.size())
      throw StoreError("undeclared variable #" + std::to_string(v.index));
}

void Store::tell_atom(const Atom &a, const Constraint &whole,
                      std::vector<VarId> *changed) {
  auto &dom = domains_[a.var.index];
  if (!dom.restrict(a.op, a.k))
    return;
  if (!is_touched_[a.var.index]) {
    is_touched_[a.var.index] = 1;
    touched_.push_back(a.var.index);
  }
  if (dom.empty())
    throw InconsistencyError("inconsistent tell: " + describe(whole), whole);
  if (changed)
    changed->push_back(a.var);
}

void Store::tell(const Constraint &c, std::vector<VarId> *changed) {
  if (!is_tellable(c))
    throw StoreError("ask-only constraint cannot be told: " + describe(c));
  check_declared(c);
  if (const auto *a = std::get_if<Atom>(&c.node)) {
    tell_atom(*a, c, changed);
  } else if (const auto *conj = std::get_if<And>(&c.node)) {
    for (const auto &item : conj->items)
      tell(item, changed);
  }
}

bool Store::entails(const Constraint &c) const {
  return std::visit(
      [&](const auto &n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Truth>) {
          return true;
        } else if constexpr (std::is_same_v<T, Atom>) {
          if (n.var.index >= domains_.size())
            throw StoreError("undeclared variable #" + std::to_string(n.var.index));
          return domains_[n.var.index].entails(n.op, n.k);
        } else if constexpr (std::is_same_v<T, And>) {
          return std::all_of(n.items.begin(), n.items.end(),
                             [&](const Constraint &x) { return entails(x); });
        } else if constexpr (std::is_same_v<T, Or>) {
          return std::any_of(n.items.begin(), n.items.end(),
                             [&](const Constraint &x) { return entails(x); });
        } else {
          Value forced_one = 0;
          Value possibly_one = 0;
          for (auto v : n.vars) {
            if (v.index >= domains_.size())
              throw StoreError("undeclared variable #" + std::to_string(v.index));
            const auto &d = domains_[v.index];
            if (d.entails(RelOp::Eq, 1))
              ++forced_one;
            if (d.contains(1))
              ++possibly_one;
          }
          return forced_one == n.k && possibly_one == n.k;
        }
      },
      c.node);
}

void Store::reset() {
  for (auto i : touched_) {
    const auto &d = vocab_.decls()[i];
    domains_[i] = Domain(d.lo, d.hi);
    is_touched_[i] = 0;
  }
  touched_.clear();
}

std::string Store::describe(VarId v) const {
  std::ostringstream os;
  const auto &d = domain(v);
  os << vocab_.decl(v).name;
  if (d.is_singleton()) {
    os << " = " << d.lo();
    return os.str();
  }
  os << " in [" << d.lo() << "," << d.hi() << "]";
  if (!d.holes().empty()) {
    os << "\\{";
    for (std::size_t i = 0; i < d.holes().size(); ++i)
      os << (i ? "," : "") << d.holes()[i];
    os << "}";
  }
  return os.str();
}

std::string Store::describe(const Constraint &c) const {
  auto name = [&](VarId v) {
    return v.index < vocab_.size() ? vocab_.decl(v).name
                                   : "#" + std::to_string(v.index);
  };
  return std::visit(
      [&](const auto &n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Truth>) {
          return "true";
        } else if constexpr (std::is_same_v<T, Atom>) {
          return name(n.var) + " " + to_string(n.op) + " " + std::to_string(n.k);
        } else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>) {
          std::string out = "(";
          const char *sep = std::is_same_v<T, And> ? " && " : " || ";
          for (std::size_t i = 0; i < n.items.size(); ++i)
            out += (i ? sep : "") + describe(n.items[i]);
          return out + ")";
        } else {
          std::string out = "count(";
          for (std::size_t i = 0; i < n.vars.size(); ++i)
            out += (i ? "," : "") + name(n.vars[i]);
          return out + ") == " + std::to_string(n.k);
        }
      },
      c.node);
}

} // namespace branchscore::store
