#include "branchscore/format/score_format.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <string>

namespace branchscore::format {

using score::Condition;
using store::RelOp;
using store::Value;

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : t_(text) {}

  Condition parse() {
    auto c = disjunction();
    skip_ws();
    if (i_ < t_.size())
      fail("unexpected '" + std::string(1, t_[i_]) + "'");
    return c;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const { throw ConditionError(msg, i_ + 1); }

  void skip_ws() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_])))
      ++i_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (t_.substr(i_, tok.size()) == tok) {
      i_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok))
      fail("expected '" + std::string(tok) + "'");
  }

  Condition disjunction() {
    std::vector<Condition> items{conjunction()};
    while (eat("||"))
      items.push_back(conjunction());
    if (items.size() == 1)
      return std::move(items.front());
    return {Condition::Any{std::move(items)}};
  }

  Condition conjunction() {
    std::vector<Condition> items{unary()};
    while (eat("&&"))
      items.push_back(unary());
    if (items.size() == 1)
      return std::move(items.front());
    return {Condition::All{std::move(items)}};
  }

  std::string identifier() {
    skip_ws();
    const auto start = i_;
    if (i_ < t_.size() && (std::isalpha(static_cast<unsigned char>(t_[i_])) || t_[i_] == '_')) {
      ++i_;
      while (i_ < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[i_])) || t_[i_] == '_'))
        ++i_;
    }
    if (start == i_)
      fail("expected a name");
    return std::string(t_.substr(start, i_ - start));
  }

  // identifier or active(point)
  std::string name(std::string first) {
    if (first != "active")
      return first;
    expect("(");
    auto p = identifier();
    expect(")");
    return "active(" + p + ")";
  }

  Value integer() {
    skip_ws();
    const auto start = i_;
    if (i_ < t_.size() && t_[i_] == '-')
      ++i_;
    while (i_ < t_.size() && std::isdigit(static_cast<unsigned char>(t_[i_])))
      ++i_;
    Value v = 0;
    auto [ptr, ec] = std::from_chars(t_.data() + start, t_.data() + i_, v);
    if (ec != std::errc() || ptr != t_.data() + i_) {
      i_ = start;
      fail("expected an integer");
    }
    return v;
  }

  std::optional<RelOp> relop() {
    // Two-character operators first.
    if (eat("=="))
      return RelOp::Eq;
    if (eat("!="))
      return RelOp::Ne;
    if (eat("<="))
      return RelOp::Le;
    if (eat(">="))
      return RelOp::Ge;
    if (eat("<"))
      return RelOp::Lt;
    if (eat(">"))
      return RelOp::Gt;
    return std::nullopt;
  }

  Condition unary() {
    if (eat("(")) {
      auto c = disjunction();
      expect(")");
      return c;
    }
    skip_ws();
    if (i_ < t_.size() && t_[i_] == '!' && t_.substr(i_, 2) != "!=") {
      ++i_;
      skip_ws();
      if (i_ < t_.size() && t_[i_] == '(')
        fail("negation applies to a single name");
      auto n = name(identifier());
      return {Condition::Ref{std::move(n), RelOp::Eq, 0}};
    }
    auto first = identifier();
    if (first == "true")
      return score::always();
    if (first == "false")
      return {Condition::Any{}};
    if (first == "count") {
      expect("(");
      std::vector<std::string> names{name(identifier())};
      while (eat(","))
        names.push_back(name(identifier()));
      expect(")");
      expect("==");
      return {Condition::Count{std::move(names), integer()}};
    }
    auto n = name(std::move(first));
    if (auto op = relop())
      return {Condition::Ref{std::move(n), *op, integer()}};
    return {Condition::Ref{std::move(n), RelOp::Ne, 0}};
  }

  std::string_view t_;
  std::size_t i_ = 0;
};

void print(const Condition &c, std::string &out, int parent); // 0 top, 1 in Any, 2 in All

void print_items(const std::vector<Condition> &items, const char *sep, int self, std::string &out) {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k)
      out += sep;
    print(items[k], out, self);
  }
}

void print(const Condition &c, std::string &out, int parent) {
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Condition::True>) {
          out += "true";
        } else if constexpr (std::is_same_v<T, Condition::Ref>) {
          if (n.op == RelOp::Ne && n.k == 0) {
            out += n.name;
          } else if (n.op == RelOp::Eq && n.k == 0) {
            out += "!" + n.name;
          } else {
            out += n.name + " " + store::to_string(n.op) + " " + std::to_string(n.k);
          }
        } else if constexpr (std::is_same_v<T, Condition::Count>) {
          out += "count(";
          for (std::size_t k = 0; k < n.names.size(); ++k)
            out += (k ? ", " : "") + n.names[k];
          out += ") == " + std::to_string(n.k);
        } else if constexpr (std::is_same_v<T, Condition::Any>) {
          if (n.items.empty()) {
            out += "false";
            return;
          }
          const bool paren = parent != 0;
          out += paren ? "(" : "";
          print_items(n.items, " || ", 1, out);
          out += paren ? ")" : "";
        } else {
          if (n.items.empty()) {
            out += "true";
            return;
          }
          const bool paren = parent == 2;
          out += paren ? "(" : "";
          print_items(n.items, " && ", 2, out);
          out += paren ? ")" : "";
        }
      },
      c.node);
}

} // namespace

Condition parse_condition(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Condition &c) {
  std::string out;
  print(c, out, 0);
  return out;
}

} // namespace branchscore::format
