#include "branchscore/format/score_format.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace branchscore::format {

using nlohmann::json;
using namespace branchscore::score;

FormatError::FormatError(const std::string &msg, std::size_t line_no, std::size_t column_no)
    : std::runtime_error(line_no ? std::to_string(line_no) + ":" + std::to_string(column_no) + ": " + msg
                                 : msg),
      line(line_no), column(column_no), detail(msg) {}

namespace {

using Path = std::vector<std::string>;

struct SemanticError {
  Path path;
  std::string message;
};

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.empty() ? 0 : text.size() - 1);
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Input iterator that records how far the parser has read.
struct TrackingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char *;
  using reference = const char &;

  const char *p;
  const char *base;
  std::size_t *furthest;

  reference operator*() const {
    *furthest = std::max(*furthest, static_cast<std::size_t>(p - base));
    return *p;
  }
  TrackingIterator &operator++() {
    ++p;
    return *this;
  }
  TrackingIterator operator++(int) {
    auto t = *this;
    ++p;
    return t;
  }
  bool operator==(const TrackingIterator &o) const { return p == o.p; }
  bool operator!=(const TrackingIterator &o) const { return p != o.p; }
};

// Finds the byte offset of the value (or key) at a JSON path.
class Locator : public nlohmann::json_sax<json> {
public:
  Locator(Path target, const std::size_t *furthest) : target_(std::move(target)), furthest_(furthest) {}
  std::optional<std::size_t> found;

  bool null() override { return scalar(); }
  bool boolean(bool) override { return scalar(); }
  bool number_integer(number_integer_t) override { return scalar(); }
  bool number_unsigned(number_unsigned_t) override { return scalar(); }
  bool number_float(number_float_t, const string_t &) override { return scalar(); }
  bool string(string_t &) override { return scalar(); }
  bool binary(binary_t &) override { return scalar(); }
  bool start_object(std::size_t) override {
    check(current());
    stack_.push_back({true, "", 0});
    return !found;
  }
  bool key(string_t &k) override {
    stack_.back().key = k;
    check(current());
    return !found;
  }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override {
    check(current());
    stack_.push_back({false, "", 0});
    return !found;
  }
  bool end_array() override { return close(); }
  bool parse_error(std::size_t, const std::string &, const nlohmann::detail::exception &) override {
    return false;
  }

private:
  struct Frame {
    bool object;
    std::string key;
    std::size_t index;
  };

  Path current() const {
    Path p;
    for (const auto &f : stack_)
      p.push_back(f.object ? f.key : std::to_string(f.index));
    return p;
  }
  void check(const Path &p) {
    if (!found && p == target_)
      found = *furthest_;
  }
  void advance() {
    if (!stack_.empty() && !stack_.back().object)
      ++stack_.back().index;
  }
  bool scalar() {
    check(current());
    advance();
    return !found;
  }
  bool close() {
    stack_.pop_back();
    advance();
    return true;
  }

  Path target_;
  const std::size_t *furthest_;
  std::vector<Frame> stack_;
};

std::optional<std::size_t> locate(std::string_view text, const Path &path) {
  std::size_t furthest = 0;
  TrackingIterator first{text.data(), text.data(), &furthest};
  TrackingIterator last{text.data() + text.size(), text.data(), &furthest};
  Locator loc(path, &furthest);
  json::sax_parse(first, last, &loc);
  if (!loc.found)
    return std::nullopt;
  // The lexer may have read one character past the token.
  auto off = *loc.found;
  while (off > 0 && off < text.size() && std::string_view(" \t\r\n,}]:").find(text[off]) != std::string_view::npos)
    --off;
  return off;
}

// ---------------------------------------------------------------------------
// Semantic reading

[[noreturn]] void fail(const Path &p, const std::string &msg) { throw SemanticError{p, msg}; }

Path child(const Path &p, const std::string &k) {
  auto out = p;
  out.push_back(k);
  return out;
}

std::string where(const Path &p) {
  std::string s;
  for (const auto &k : p)
    s += "/" + k;
  return s.empty() ? "/" : s;
}

void only_fields(const json &j, const Path &p, std::initializer_list<const char *> allowed) {
  if (!j.is_object())
    fail(p, "expected an object at " + where(p));
  for (const auto &[k, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return k == a; }))
      fail(child(p, k), "unknown field '" + k + "' at " + where(p));
}

const json &field(const json &j, const Path &p, const char *name) {
  auto it = j.find(name);
  if (it == j.end())
    fail(p, std::string("missing field '") + name + "' at " + where(p));
  return *it;
}

std::string string_field(const json &j, const Path &p, const char *name) {
  const auto &v = field(j, p, name);
  if (!v.is_string())
    fail(child(p, name), std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

Value int_value(const json &v, const Path &p) {
  if (v.is_number_integer())
    return v.get<Value>();
  if (v.is_number_unsigned() && v.get<std::uint64_t>() <= static_cast<std::uint64_t>(INT64_MAX))
    return static_cast<Value>(v.get<std::uint64_t>());
  fail(p, "expected an integer at " + where(p));
}

Value int_field(const json &j, const Path &p, const char *name) {
  return int_value(field(j, p, name), child(p, name));
}

std::vector<std::string> string_list(const json &j, const Path &p, const char *name) {
  auto it = j.find(name);
  if (it == j.end())
    return {};
  if (!it->is_array())
    fail(child(p, name), std::string("field '") + name + "' must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < it->size(); ++k) {
    if (!(*it)[k].is_string())
      fail(child(child(p, name), std::to_string(k)), "expected a string");
    out.push_back((*it)[k].get<std::string>());
  }
  return out;
}

Condition condition_field(const json &j, const Path &p, const char *name) {
  auto it = j.find(name);
  if (it == j.end())
    return always();
  if (!it->is_string())
    fail(child(p, name), std::string("field '") + name + "' must be a condition string");
  try {
    return parse_condition(it->get<std::string>());
  } catch (const ConditionError &e) {
    fail(child(p, name), "in condition '" + it->get<std::string>() + "' at column " +
                             std::to_string(e.column) + ": " + e.what());
  }
}

VarDecl read_var(const json &j, const Path &p) {
  only_fields(j, p, {"name", "lo", "hi"});
  return {string_field(j, p, "name"), int_field(j, p, "lo"), int_field(j, p, "hi")};
}

std::vector<VarDecl> var_list(const json &j, const Path &p, const char *name) {
  auto it = j.find(name);
  if (it == j.end())
    return {};
  if (!it->is_array())
    fail(child(p, name), std::string("field '") + name + "' must be an array");
  std::vector<VarDecl> out;
  for (std::size_t k = 0; k < it->size(); ++k)
    out.push_back(read_var((*it)[k], child(child(p, name), std::to_string(k))));
  return out;
}

PointSpec read_point(const json &j, const Path &p) {
  only_fields(j, p, {"id", "pre", "post"});
  PointSpec out;
  out.id = string_field(j, p, "id");
  const auto pre = string_field(j, p, "pre");
  if (pre == "WA")
    out.pre = PreBehavior::WaitForAll;
  else if (pre == "WF")
    out.pre = PreBehavior::WaitForFirst;
  else
    fail(child(p, "pre"), "pre must be \"WA\" or \"WF\", got \"" + pre + "\"");
  const auto post = string_field(j, p, "post");
  if (post == "CH")
    out.post = PostBehavior::Choice;
  else if (post == "NCH")
    out.post = PostBehavior::NoChoice;
  else
    fail(child(p, "post"), "post must be \"CH\" or \"NCH\", got \"" + post + "\"");
  return out;
}

DurationClass read_class(const json &j, const Path &p) {
  if (!j.is_object())
    fail(p, "class must be an object");
  const auto kind = string_field(j, p, "kind");
  if (kind == "flexible") {
    only_fields(j, p, {"kind"});
    return {};
  }
  if (kind == "rigid") {
    only_fields(j, p, {"kind", "lo", "hi"});
    return {DurationClass::Kind::Rigid, int_field(j, p, "lo"), int_field(j, p, "hi")};
  }
  if (kind == "semiRigid") {
    only_fields(j, p, {"kind", "lo"});
    return {DurationClass::Kind::SemiRigid, int_field(j, p, "lo"), 0};
  }
  fail(child(p, "kind"), "class kind must be flexible, rigid or semiRigid, got \"" + kind + "\"");
}

IntervalSpec read_interval(const json &j, const Path &p) {
  if (!j.is_object())
    fail(p, "expected an object at " + where(p));
  IntervalSpec out;
  const auto kind = string_field(j, p, "kind");
  if (kind == "TCR") {
    only_fields(j, p, {"id", "kind", "src", "dst", "duration", "condition", "interpretation"});
    out.kind = IntervalKind::Relation;
    out.condition = condition_field(j, p, "condition");
    if (j.contains("interpretation")) {
      const auto interp = string_field(j, p, "interpretation");
      if (interp == "when")
        out.interpretation = Interpretation::When;
      else if (interp == "unless")
        out.interpretation = Interpretation::Unless;
      else
        fail(child(p, "interpretation"), "interpretation must be \"when\" or \"unless\"");
    }
  } else if (kind == "TO") {
    only_fields(j, p, {"id", "kind", "src", "dst", "duration", "class", "proc", "params", "children",
                       "vars", "local"});
    out.kind = IntervalKind::Object;
    if (j.contains("class"))
      out.duration_class = read_class(j["class"], child(p, "class"));
    if (j.contains("proc"))
      out.proc = string_field(j, p, "proc");
    out.params = string_list(j, p, "params");
    out.children = string_list(j, p, "children");
    out.vars = var_list(j, p, "vars");
    out.local = condition_field(j, p, "local");
  } else {
    fail(child(p, "kind"), "interval kind must be \"TCR\" or \"TO\", got \"" + kind + "\"");
  }
  out.id = string_field(j, p, "id");
  out.src = string_field(j, p, "src");
  out.dst = string_field(j, p, "dst");
  out.duration = int_field(j, p, "duration");
  if (out.duration < 0)
    fail(child(p, "duration"), "duration must be non-negative");
  return out;
}

Score read_score(const json &j) {
  const Path root;
  only_fields(j, root, {"version", "start", "end", "variables", "points", "intervals"});
  if (int_field(j, root, "version") != 1)
    fail({"version"}, "unsupported version " + field(j, root, "version").dump());
  Score s;
  s.start = string_field(j, root, "start");
  if (j.contains("end"))
    s.end = string_field(j, root, "end");
  s.variables = var_list(j, root, "variables");
  const auto &points = field(j, root, "points");
  if (!points.is_array())
    fail({"points"}, "points must be an array");
  for (std::size_t k = 0; k < points.size(); ++k)
    s.points.push_back(read_point(points[k], {"points", std::to_string(k)}));
  const auto &intervals = field(j, root, "intervals");
  if (!intervals.is_array())
    fail({"intervals"}, "intervals must be an array");
  for (std::size_t k = 0; k < intervals.size(); ++k)
    s.intervals.push_back(read_interval(intervals[k], {"intervals", std::to_string(k)}));
  return s;
}

// ---------------------------------------------------------------------------
// Writing

nlohmann::ordered_json write_var(const VarDecl &v) {
  return {{"name", v.name}, {"lo", v.lo}, {"hi", v.hi}};
}

nlohmann::ordered_json write_class(const DurationClass &c) {
  switch (c.kind) {
  case DurationClass::Kind::Rigid:
    return {{"kind", "rigid"}, {"lo", c.lo}, {"hi", c.hi}};
  case DurationClass::Kind::SemiRigid:
    return {{"kind", "semiRigid"}, {"lo", c.lo}};
  default:
    return {{"kind", "flexible"}};
  }
}

nlohmann::ordered_json write_interval(const IntervalSpec &i) {
  nlohmann::ordered_json j;
  j["id"] = i.id;
  j["kind"] = to_string(i.kind);
  j["src"] = i.src;
  j["dst"] = i.dst;
  j["duration"] = i.duration;
  if (i.kind == IntervalKind::Relation) {
    j["condition"] = to_string(i.condition);
    j["interpretation"] = to_string(i.interpretation);
    return j;
  }
  j["class"] = write_class(i.duration_class);
  j["proc"] = i.proc;
  j["params"] = i.params;
  j["children"] = i.children;
  auto vars = nlohmann::ordered_json::array();
  for (const auto &v : i.vars)
    vars.push_back(write_var(v));
  j["vars"] = std::move(vars);
  j["local"] = to_string(i.local);
  return j;
}

} // namespace

Score parse_score(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line 1, column 2: " prefix.
    if (auto pos = what.find(": "); pos != std::string::npos)
      what = what.substr(pos + 2);
    throw FormatError("syntax error: " + what, line, col);
  }
  try {
    return read_score(j);
  } catch (const SemanticError &e) {
    auto off = locate(text, e.path);
    if (!off)
      throw FormatError(e.message, 0, 0);
    auto [line, col] = line_col(text, *off);
    throw FormatError(e.message, line, col);
  }
}

Score load_score(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw IoError("cannot read " + path.string());
  return parse_score(buf.str());
}

std::string serialize_score(const Score &input) {
  const Score s = canonical(input);
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["start"] = s.start;
  if (s.end)
    j["end"] = *s.end;
  auto vars = nlohmann::ordered_json::array();
  for (const auto &v : s.variables)
    vars.push_back(write_var(v));
  j["variables"] = std::move(vars);
  auto points = nlohmann::ordered_json::array();
  for (const auto &p : s.points)
    points.push_back({{"id", p.id}, {"pre", to_string(p.pre)}, {"post", to_string(p.post)}});
  j["points"] = std::move(points);
  auto intervals = nlohmann::ordered_json::array();
  for (const auto &i : s.intervals)
    intervals.push_back(write_interval(i));
  j["intervals"] = std::move(intervals);
  return j.dump(2) + "\n";
}

Score generate_benchmark(int n) {
  if (n < 1 || n > 16)
    throw std::invalid_argument("benchmark depth must be in 1..16, got " + std::to_string(n));
  Score s;
  const std::size_t leaves = std::size_t{1} << n;
  auto fan = [](std::size_t k) { return "f" + std::to_string(k); };
  auto join = [](std::size_t k) { return "j" + std::to_string(k); };
  auto relation = [&](const std::string &a, const std::string &b) {
    IntervalSpec i;
    i.id = a + "_" + b;
    i.src = a;
    i.dst = b;
    i.duration = 1;
    s.intervals.push_back(std::move(i));
  };
  // Heap numbering: fan node k feeds 2k and 2k+1; join node k is fed by the
  // nodes numbered 2k and 2k+1 one level down, fan leaves at the bottom.
  for (std::size_t k = 1; k < 2 * leaves; ++k) {
    s.points.push_back({fan(k), PreBehavior::WaitForFirst, PostBehavior::NoChoice});
    if (k < leaves) {
      relation(fan(k), fan(2 * k));
      relation(fan(k), fan(2 * k + 1));
    }
  }
  for (std::size_t k = 1; k < leaves; ++k) {
    s.points.push_back({join(k), PreBehavior::WaitForAll, PostBehavior::NoChoice});
    const bool bottom = 2 * k >= leaves;
    relation(bottom ? fan(2 * k) : join(2 * k), join(k));
    relation(bottom ? fan(2 * k + 1) : join(2 * k + 1), join(k));
  }
  s.start = fan(1);
  s.end = join(1);
  return s;
}

} // namespace branchscore::format
