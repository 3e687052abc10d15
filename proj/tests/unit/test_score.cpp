#include "doctest.h"

#include "branchscore/runtime/trace.hpp"
#include "branchscore/score/compile.hpp"
#include "score_oracle.hpp"

#include <algorithm>

using namespace branchscore;
using namespace branchscore::score;
using testing::OracleUnit;
using testing::ScoreEnv;

namespace {

std::vector<std::vector<store::Constraint>> to_envs(const CompiledScore &cs, const ScoreEnv &env) {
  std::vector<std::vector<store::Constraint>> out;
  for (const auto &unit : env) {
    std::vector<store::Constraint> tells;
    for (const auto &[name, v] : unit)
      tells.push_back(store::eq(*cs.variable(name), v));
    out.push_back(std::move(tells));
  }
  return out;
}

std::vector<runtime::TraceRecord> run_score(const CompiledScore &cs, const ScoreEnv &env,
                                            std::size_t units) {
  std::vector<runtime::TraceRecord> out;
  for (const auto &tick : ntcc::run(cs.program, to_envs(cs, env), units))
    out.push_back(runtime::make_record(cs, tick));
  return out;
}

OracleUnit as_oracle(const runtime::TraceRecord &r) {
  OracleUnit u;
  u.active.insert(r.active.begin(), r.active.end());
  for (const auto &t : r.transfers)
    u.transfers.insert({t.src, t.dst});
  for (const auto &e : r.procs)
    u.events.insert({e.event, e.name, e.interval});
  u.discarded_choices = static_cast<std::size_t>(std::count_if(
      r.warnings.begin(), r.warnings.end(),
      [](const std::string &w) { return w.rfind("choice discarded", 0) == 0; }));
  return u;
}

ScoreEnv finish_env(std::size_t units, std::size_t flip) {
  ScoreEnv env(units);
  for (std::size_t u = 0; u < units; ++u)
    env[u]["finish"] = u < flip ? 0 : 1;
  return env;
}

bool has_code(const std::vector<ScoreDiagnostic> &ds, const std::string &code) {
  return std::any_of(ds.begin(), ds.end(), [&](const auto &d) { return d.code == code; });
}

} // namespace

TEST_CASE("example score validates clean") {
  auto ds = validate_score(example_score());
  for (const auto &d : ds)
    MESSAGE(format(d));
  CHECK(count(ds, Severity::Error) == 0);
  CHECK(count(ds, Severity::Warning) == 0);
}

TEST_CASE("example score compiles to the expected process counts") {
  auto cs = compile_score(example_score());
  CHECK(cs.summary.choice_points == 1);
  CHECK(cs.summary.wait_for_all_points == 1);
  CHECK(cs.summary.jump_to_all_points == 6);
  CHECK(cs.summary.interval_agents == 10);
  CHECK(ntcc::validate_program(cs.program->defs, cs.program->main).empty());
}

TEST_CASE("example loop trace") {
  auto cs = compile_score(example_score());
  constexpr std::size_t units = 30;
  auto trace = run_score(cs, finish_env(units, 20), units);

  auto starts = [&](const std::string &p) {
    std::vector<std::uint64_t> at;
    for (const auto &r : trace)
      if (r.is_active(p))
        at.push_back(r.unit);
    return at;
  };
  using V = std::vector<std::uint64_t>;
  CHECK(starts("s_a") == V{0, 7, 14});
  CHECK(starts("s_b") == V{1, 8, 15});
  CHECK(starts("s_d") == V{1, 8, 15});
  CHECK(starts("e_d") == V{2, 9, 16});
  CHECK(starts("e_b") == V{4, 11, 18});
  CHECK(starts("s_c") == V{5, 12, 19});
  CHECK(starts("e_c") == V{7, 14, 21});
  // finish is 1 from unit 20, so the third return to e_c ends the scenario.
  CHECK(starts("e_a") == V{21});

  const runtime::Transfer loop{"e_c", "s_a"};
  CHECK(std::count(trace[7].transfers.begin(), trace[7].transfers.end(), loop) == 1);
  CHECK(trace[0].procs.empty());
  REQUIRE(trace[1].procs.size() == 2);
  CHECK(trace[4].procs == std::vector<runtime::ProcEvent>{{"stop", "playSoundB", {}, "B"}});
  for (const auto &r : trace)
    CHECK(r.warnings.empty());
}

TEST_CASE("example with finish set from the start plays once") {
  auto cs = compile_score(example_score());
  auto trace = run_score(cs, finish_env(12, 0), 12);
  std::vector<std::uint64_t> ea, sa;
  for (const auto &r : trace) {
    if (r.is_active("e_a"))
      ea.push_back(r.unit);
    if (r.is_active("s_a"))
      sa.push_back(r.unit);
  }
  CHECK(ea == std::vector<std::uint64_t>{7});
  CHECK(sa == std::vector<std::uint64_t>{0});
}

TEST_CASE("choice with finish unknown is discarded with a warning") {
  auto cs = compile_score(example_score());
  auto trace = run_score(cs, ScoreEnv(10), 10);
  REQUIRE(trace[7].warnings.size() == 1);
  CHECK(trace[7].warnings[0] == "choice discarded, no guard entailed: e_c");
  CHECK(trace[7].transfers.empty());
  for (std::size_t u = 8; u < 10; ++u)
    CHECK(trace[u].active.empty());
}

TEST_CASE("example agrees with the direct simulation") {
  auto s = example_score();
  auto cs = compile_score(s);
  for (std::size_t flip : {0, 5, 7, 8, 20}) {
    auto env = finish_env(40, flip);
    auto oracle = testing::oracle_run(s, env, 40);
    auto trace = run_score(cs, env, 40);
    for (std::size_t u = 0; u < 40; ++u)
      CHECK(as_oracle(trace[u]) == oracle[u]);
  }
}

TEST_CASE("property: compiled random scores agree with the direct simulation") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto s = testing::random_score(rng);
    auto ds = validate_score(s);
    REQUIRE_FALSE(has_errors(ds));
    auto cs = compile_score(s);
    auto env = testing::random_env(rng, 16);
    auto oracle = testing::oracle_run(s, env, 16);
    auto trace = run_score(cs, env, 16);
    for (std::size_t u = 0; u < 16; ++u) {
      INFO("trial " << trial << " unit " << u);
      CHECK(as_oracle(trace[u]) == oracle[u]);
    }
  }
}

// ---------------------------------------------------------------------------
// Validator

TEST_CASE("validator: duplicate interval") {
  auto s = example_score();
  s.intervals.push_back(s.intervals[4]);
  CHECK(has_code(validate_score(s), "duplicate-interval"));

  auto t = example_score();
  auto extra = t.intervals[4];
  extra.id = "again";
  t.intervals.push_back(extra);
  auto ds = validate_score(t);
  CHECK(has_code(ds, "duplicate-interval"));
  CHECK_THROWS_AS(compile_score(t), CompileError);
}

TEST_CASE("validator: dangling point") {
  auto s = example_score();
  s.intervals[5].dst = "nowhere";
  auto ds = validate_score(s);
  CHECK(has_code(ds, "dangling-point"));

  auto t = example_score();
  t.start = "missing";
  CHECK(has_code(validate_score(t), "dangling-point"));
  auto u = example_score();
  u.end = "missing";
  CHECK(has_code(validate_score(u), "dangling-point"));
}

TEST_CASE("validator: hierarchy coherence") {
  auto s = example_score();
  // A contains a child that starts outside it.
  s.points.push_back({"s_x", PreBehavior::WaitForFirst, PostBehavior::NoChoice});
  s.points.push_back({"e_x", PreBehavior::WaitForFirst, PostBehavior::NoChoice});
  IntervalSpec x;
  x.id = "X";
  x.kind = IntervalKind::Object;
  x.src = "s_x";
  x.dst = "e_x";
  x.duration = 1;
  s.intervals.push_back(x);
  s.intervals[0].children.push_back("X");
  CHECK(has_code(validate_score(s), "hierarchy-coherence"));

  auto t = example_score();
  t.intervals[0].children.push_back("sa_sb"); // a relation, not an object
  CHECK(has_code(validate_score(t), "hierarchy-coherence"));

  auto u = example_score();
  u.intervals[1].children.push_back("C"); // C now has two parents
  CHECK(has_code(validate_score(u), "hierarchy-coherence"));
}

TEST_CASE("validator: unless interpretation") {
  auto s = example_score();
  s.intervals[4].interpretation = Interpretation::Unless;
  auto ds = validate_score(s);
  CHECK(has_code(ds, "unless-interpretation"));
  CHECK(has_errors(ds));
}

TEST_CASE("validator: wait-for-all with choice is rejected") {
  auto s = example_score();
  s.points[4].post = PostBehavior::Choice;
  CHECK(has_code(validate_score(s), "unsupported-behavior"));
  CHECK_THROWS_AS(compile_score(s), CompileError);
}

TEST_CASE("validator: best-effort durations after a choice") {
  auto s = example_score();
  s.intervals[1].duration_class = {DurationClass::Kind::Rigid, 3, 3};
  auto ds = validate_score(s);
  CHECK(has_code(ds, "best-effort-duration"));
  CHECK_FALSE(has_errors(ds));

  auto t = example_score();
  t.intervals[1].duration_class = {DurationClass::Kind::Rigid, 4, 5};
  CHECK(has_code(validate_score(t), "duration-class"));
}

TEST_CASE("validator: local constraints and unknown variables") {
  auto s = example_score();
  s.intervals[0].local = is_set("finish");
  auto ds = validate_score(s);
  CHECK(has_code(ds, "local-constraint"));
  CHECK(count(ds, Severity::Note) == 1);
  CHECK_FALSE(has_errors(ds));

  auto t = example_score();
  t.intervals[4].condition = is_set("nope");
  CHECK(has_code(validate_score(t), "unknown-variable"));

  auto u = example_score();
  u.intervals[4].condition = is_set("active(e_b)");
  CHECK_FALSE(has_errors(validate_score(u)));
  u.intervals[4].condition = is_set("active(e_q)");
  CHECK(has_code(validate_score(u), "dangling-point"));
}

TEST_CASE("validator: relation and object fields do not mix") {
  auto s = example_score();
  s.intervals[4].proc = "noise";
  CHECK(has_code(validate_score(s), "tcr-fields"));
  auto t = example_score();
  t.intervals[1].condition = is_set("finish");
  CHECK(has_code(validate_score(t), "to-fields"));
}

TEST_CASE("active(p) conditions compile and are entailed once p is active") {
  // a -> b waits one unit, then b -> c is gated on b having been reached.
  Score s;
  s.points = {{"a", PreBehavior::WaitForFirst, PostBehavior::NoChoice},
              {"b", PreBehavior::WaitForFirst, PostBehavior::NoChoice},
              {"c", PreBehavior::WaitForFirst, PostBehavior::NoChoice}};
  IntervalSpec ab;
  ab.id = "ab";
  ab.src = "a";
  ab.dst = "b";
  ab.duration = 1;
  IntervalSpec bc = ab;
  bc.id = "bc";
  bc.src = "b";
  bc.dst = "c";
  bc.condition = is_set("active(b)");
  s.intervals = {ab, bc};
  s.start = "a";
  s.end = "c";
  auto cs = compile_score(s);
  auto trace = run_score(cs, ScoreEnv(4), 4);
  CHECK(trace[2].is_active("c"));
}
