#pragma once

#include "branchscore/store/constraint.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace branchscore::store {

struct VarDecl {
  std::string name;
  Value lo = 0;
  Value hi = 1;
  friend bool operator==(const VarDecl &, const VarDecl &) = default;
};

inline constexpr Value kCounterMax = 2147483647;

/// Raised on malformed vocabulary use (duplicate names, bad bounds,
/// unknown variables, ask-only constraints told).
class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A tell emptied a domain.
class InconsistencyError : public std::runtime_error {
public:
  InconsistencyError(std::string what, Constraint offending)
      : std::runtime_error(std::move(what)), constraint(std::move(offending)) {}
  Constraint constraint;
};

/// Integer interval minus a sorted set of holes strictly inside it.
class Domain {
public:
  Domain() = default;
  Domain(Value lo, Value hi) : lo_(lo), hi_(hi) {}

  Value lo() const { return lo_; }
  Value hi() const { return hi_; }
  const std::vector<Value> &holes() const { return holes_; }
  bool empty() const { return lo_ > hi_; }
  bool contains(Value v) const;
  bool is_singleton() const { return lo_ == hi_; }
  std::optional<Value> value() const {
    return is_singleton() ? std::optional<Value>(lo_) : std::nullopt;
  }
  /// Number of values; saturates at UINT64_MAX for huge ranges.
  std::uint64_t size() const;

  /// All values satisfy `v op k`.
  bool entails(RelOp op, Value k) const;
  /// Narrow to values satisfying `v op k`. Returns true if changed.
  /// May leave the domain empty; callers check empty().
  bool restrict(RelOp op, Value k);

  friend bool operator==(const Domain &, const Domain &) = default;

private:
  void normalize();
  Value lo_ = 0;
  Value hi_ = -1;
  std::vector<Value> holes_;
};

/// Declared variables shared by a program and its stores.
class Vocabulary {
public:
  VarId declare(const VarDecl &decl);
  /// Declares a variable named `<prefix>#<n>` that no other call returns.
  VarId fresh(std::string_view prefix, Value lo, Value hi);
  std::optional<VarId> find(std::string_view name) const;
  VarId at(std::string_view name) const;
  const VarDecl &decl(VarId v) const { return decls_.at(v.index); }
  std::size_t size() const { return decls_.size(); }
  const std::vector<VarDecl> &decls() const { return decls_; }

private:
  std::vector<VarDecl> decls_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t fresh_counter_ = 0;
};

/// Per-time-unit finite-domain store. Domains only shrink between resets.
class Store {
public:
  Store() = default;
  explicit Store(const Vocabulary &vocab);

  /// Adds a variable to this store and its own vocabulary copy.
  VarId declare_var(const VarDecl &decl);

  /// Narrows domains so every remaining valuation satisfies c.
  /// Appends variables whose domain changed to `changed` when non-null.
  void tell(const Constraint &c, std::vector<VarId> *changed = nullptr);
  bool entails(const Constraint &c) const;

  /// Restore every domain to its declared bounds.
  void reset();

  const Domain &domain(VarId v) const { return domains_.at(v.index); }
  std::optional<Value> value(VarId v) const { return domain(v).value(); }
  std::size_t size() const { return domains_.size(); }
  const Vocabulary &vocabulary() const { return vocab_; }
  std::uint64_t unit() const { return unit_; }
  void set_unit(std::uint64_t u) { unit_ = u; }

  /// Compact rendering, e.g. "pitch in [41,58]\\{50}".
  std::string describe(VarId v) const;
  std::string describe(const Constraint &c) const;

private:
  void check_declared(const Constraint &c) const;
  void tell_atom(const Atom &a, const Constraint &whole,
                 std::vector<VarId> *changed);

  Vocabulary vocab_;
  std::vector<Domain> domains_;
  std::vector<std::uint32_t> touched_;
  std::vector<char> is_touched_;
  std::uint64_t unit_ = 0;
};

} // namespace branchscore::store
