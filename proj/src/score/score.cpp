#include "branchscore/score/score.hpp"

#include <algorithm>

namespace branchscore::score {

namespace {

void collect_names(const Condition &c, std::vector<std::string> &out) {
  auto add = [&](const std::string &n) {
    if (std::find(out.begin(), out.end(), n) == out.end())
      out.push_back(n);
  };
  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Condition::Ref>) {
          add(n.name);
        } else if constexpr (std::is_same_v<T, Condition::Count>) {
          for (const auto &name : n.names)
            add(name);
        } else if constexpr (std::is_same_v<T, Condition::All> ||
                             std::is_same_v<T, Condition::Any>) {
          for (const auto &item : n.items)
            collect_names(item, out);
        }
      },
      c.node);
}

PointSpec wf(std::string id) {
  return {std::move(id), PreBehavior::WaitForFirst, PostBehavior::NoChoice};
}

IntervalSpec relation(std::string id, std::string src, std::string dst, Value d,
                      Condition c = always()) {
  IntervalSpec s;
  s.id = std::move(id);
  s.kind = IntervalKind::Relation;
  s.src = std::move(src);
  s.dst = std::move(dst);
  s.duration = d;
  s.condition = std::move(c);
  return s;
}

IntervalSpec object(std::string id, std::string src, std::string dst, Value d,
                    std::string proc) {
  IntervalSpec s;
  s.id = std::move(id);
  s.kind = IntervalKind::Object;
  s.src = std::move(src);
  s.dst = std::move(dst);
  s.duration = d;
  s.proc = std::move(proc);
  return s;
}

} // namespace

std::vector<std::string> names_of(const Condition &c) {
  std::vector<std::string> out;
  collect_names(c, out);
  return out;
}

const PointSpec *Score::point(std::string_view id) const {
  for (const auto &p : points)
    if (p.id == id)
      return &p;
  return nullptr;
}

const IntervalSpec *Score::interval(std::string_view id) const {
  for (const auto &i : intervals)
    if (i.id == id)
      return &i;
  return nullptr;
}

std::vector<VarDecl> Score::declared_variables() const {
  std::vector<VarDecl> out = variables;
  for (const auto &i : intervals)
    out.insert(out.end(), i.vars.begin(), i.vars.end());
  return out;
}

Score canonical(Score s) {
  std::stable_sort(s.points.begin(), s.points.end(),
                   [](const PointSpec &a, const PointSpec &b) { return a.id < b.id; });
  std::stable_sort(s.intervals.begin(), s.intervals.end(),
                   [](const IntervalSpec &a, const IntervalSpec &b) { return a.id < b.id; });
  return s;
}

Score example_score() {
  Score s;
  s.points = {wf("s_a"), wf("e_a"), wf("s_b"), wf("e_b"),
              {"s_c", PreBehavior::WaitForAll, PostBehavior::NoChoice},
              {"e_c", PreBehavior::WaitForFirst, PostBehavior::Choice},
              wf("s_d"), wf("e_d")};

  IntervalSpec a = object("A", "s_a", "e_a", 0, kSilence);
  a.children = {"B", "C", "D"};
  a.vars = {{"finish", 0, 1}};
  s.intervals.push_back(std::move(a));
  s.intervals.push_back(object("B", "s_b", "e_b", 3, "playSoundB"));
  s.intervals.push_back(object("C", "s_c", "e_c", 2, "PlayVideoC"));
  s.intervals.push_back(object("D", "s_d", "e_d", 1, "TurnOnLightsD"));

  s.intervals.push_back(relation("sa_sb", "s_a", "s_b", 1));
  s.intervals.push_back(relation("sa_sd", "s_a", "s_d", 1));
  s.intervals.push_back(relation("eb_sc", "e_b", "s_c", 1));
  s.intervals.push_back(relation("ed_sc", "e_d", "s_c", 1));
  s.intervals.push_back(relation("ec_sa", "e_c", "s_a", 0, is_unset("finish")));
  s.intervals.push_back(relation("ec_ea", "e_c", "e_a", 0, is_set("finish")));

  s.start = "s_a";
  s.end = "e_a";
  return s;
}

const char *to_string(PreBehavior b) {
  return b == PreBehavior::WaitForAll ? "WA" : "WF";
}

const char *to_string(PostBehavior b) {
  return b == PostBehavior::Choice ? "CH" : "NCH";
}

const char *to_string(IntervalKind k) {
  return k == IntervalKind::Object ? "TO" : "TCR";
}

const char *to_string(Interpretation i) {
  return i == Interpretation::Unless ? "unless" : "when";
}

} // namespace branchscore::score
