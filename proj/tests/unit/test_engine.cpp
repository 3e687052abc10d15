#include "doctest.h"

#include "branchscore/ntcc/engine.hpp"
#include "random_programs.hpp"
#include "reference_eval.hpp"

#include <set>

using namespace branchscore;
using namespace branchscore::ntcc;
using store::RelOp;

namespace {

std::shared_ptr<const Program> share(Program p) {
  return std::make_shared<const Program>(std::move(p));
}

bool has_diag(const std::vector<Diagnostic> &d, const std::string &text) {
  for (const auto &x : d)
    if (x.message.find(text) != std::string::npos)
      return true;
  return false;
}

} // namespace

TEST_CASE("validate_program: guarded Clock recursion is valid") {
  Program p;
  auto clock = p.vocab.declare({"clock", 0, store::kCounterMax});
  p.defs.push_back({"Clock", 1,
                    par({tell(atom(clock, RelOp::Eq, param(0))),
                         next(call("Clock", {param(0) + 1}))})});
  p.main = call("Clock", {0});
  CHECK(validate_program(p.defs, p.main).empty());
}

TEST_CASE("validate_program: recursion without next is rejected") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 1});
  p.defs.push_back({"Q", 0, par({tell(store::eq(x, 1)), call("Q")})});
  p.main = call("Q");
  auto d = validate_program(p.defs, p.main);
  REQUIRE(d.size() == 1);
  CHECK(d.front().message == "unguarded recursion at Q");
  CHECK_THROWS_AS(Engine(share(p)), std::invalid_argument);
}

TEST_CASE("validate_program: mutual recursion crossing one next is valid") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 100});
  p.defs.push_back({"A", 0, par({tell(store::ne(x, 0)), next(call("B"))})});
  p.defs.push_back({"B", 0, call("A")});
  p.main = call("A");
  CHECK(validate_program(p.defs, p.main).empty());
  // Unfolding two units expands B -> A once per unit and terminates.
  auto results = run(share(p), {}, 3);
  CHECK(results.size() == 3);

  Program q = p;
  q.defs[0] = {"A", 0, par({tell(store::ne(x, 0)), call("B")})};
  CHECK(has_diag(validate_program(q.defs, q.main), "unguarded recursion"));
}

TEST_CASE("validate_program: unresolved calls and arity") {
  std::vector<Definition> defs{{"P", 1, skip()}};
  auto d = validate_program(defs, par({call("P"), call("Missing", {1})}));
  CHECK(has_diag(d, "arity mismatch calling P"));
  CHECK(has_diag(d, "unresolved call Missing"));
  // unless-next guards recursion like next does.
  std::vector<Definition> pw{{"W", 0, unless(store::truth(), call("W"))}};
  CHECK(validate_program(pw, call("W")).empty());
}

TEST_CASE("tell and when fire in the same unit") {
  Program p;
  auto pitch1 = p.vocab.declare({"pitch1", 0, 127});
  auto instrument = p.vocab.declare({"Instrument", 0, 16});
  p.main = par({tell(store::eq(pitch1, 52)),
                when(store::all_of({store::gt(pitch1, 48), store::lt(pitch1, 59)}),
                     tell(store::eq(instrument, 1)))});
  p.observables = {instrument};
  auto r = run(share(p), {}, 1);
  CHECK(r[0].observables[0].value == 1);
}

TEST_CASE("when ... do next changes state in the following unit") {
  Program p;
  auto pitch1 = p.vocab.declare({"pitch1", 0, 127});
  p.main = when(store::eq(pitch1, 60), next(tell(store::ne(pitch1, 60))));
  auto prog = share(p);
  Engine e(prog);
  e.step({store::eq(pitch1, 60)});
  CHECK(e.store().entails(store::eq(pitch1, 60)));
  e.step();
  CHECK(e.store().entails(store::ne(pitch1, 60)));
}

TEST_CASE("unless fires in the next unit when its guard is not deducible") {
  Program p;
  auto pitch1 = p.vocab.declare({"pitch1", 0, 127});
  auto last = p.vocab.declare({"lastPitch", 0, 127});
  p.main = unless(store::eq(pitch1, 60), tell(store::ne(last, 60)));
  auto prog = share(p);
  {
    Engine e(prog);
    e.step();
    CHECK_FALSE(e.store().entails(store::ne(last, 60)));
    e.step();
    CHECK(e.store().entails(store::ne(last, 60)));
  }
  {
    Engine e(prog);
    e.step({store::eq(pitch1, 60)});
    e.step();
    CHECK_FALSE(e.store().entails(store::ne(last, 60)));
  }
}

TEST_CASE("bang tells every unit") {
  Program p;
  auto c4 = p.vocab.declare({"C4", 0, 127});
  p.main = bang(tell(store::eq(c4, 60)));
  p.observables = {c4};
  for (const auto &r : run(share(p), {}, 5))
    CHECK(r.observables[0].value == 60);
}

TEST_CASE("Clock(0) counts units") {
  Program p;
  auto clock = p.vocab.declare({"clock", 0, store::kCounterMax});
  p.defs.push_back({"Clock", 1,
                    par({tell(atom(clock, RelOp::Eq, param(0))),
                         next(call("Clock", {param(0) + 1}))})});
  p.main = call("Clock", {0});
  p.observables = {clock};
  auto r = run(share(p), {}, 3);
  CHECK(r[0].observables[0].value == 0);
  CHECK(r[1].observables[0].value == 1);
  CHECK(r[2].observables[0].value == 2);
}

namespace {

// Sum over i in {48,52,55}: when played_i do tell(pitch = i).
struct ChordChoice {
  std::shared_ptr<const Program> program;
  VarId pitch;
  std::vector<store::Constraint> env;
};

ChordChoice chord_choice() {
  Program p;
  auto pitch = p.vocab.declare({"pitch", 0, 127});
  std::vector<Agent::Branch> branches;
  std::vector<store::Constraint> env;
  for (store::Value i : {48, 52, 55}) {
    auto played = p.vocab.declare({"played" + std::to_string(i), 0, 1});
    branches.push_back({store::eq(played, 1), tell(store::eq(pitch, i))});
    if (i != 48)
      env.push_back(store::eq(played, 1));
  }
  p.main = sum(std::move(branches), "chord");
  p.observables = {pitch};
  return {share(std::move(p)), pitch, env};
}

} // namespace

TEST_CASE("sum: lowest-index policy picks the first enabled branch") {
  auto c = chord_choice();
  auto r = run(c.program, {c.env}, 1);
  CHECK(r[0].observables[0].value == 52);
  REQUIRE(r[0].fired.size() == 1);
  CHECK(r[0].fired[0].branch == 1);
  CHECK(r[0].fired[0].enabled == 2);
}

TEST_CASE("sum: seeded policy is reproducible and picks an enabled branch") {
  auto c = chord_choice();
  std::set<store::Value> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    EngineOptions opts{SumPolicy::SeededRandom, seed};
    auto a = run(c.program, {c.env}, 1, opts);
    auto b = run(c.program, {c.env}, 1, opts);
    CHECK(a == b);
    auto v = a[0].observables[0].value;
    REQUIRE(v.has_value());
    CHECK((*v == 52 || *v == 55));
    seen.insert(*v);
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("sum with nothing enabled is discarded with a warning") {
  auto c = chord_choice();
  auto r = run(c.program, {}, 1);
  CHECK(r[0].fired.empty());
  REQUIRE(r[0].warnings.size() == 1);
  CHECK(r[0].warnings[0].find("chord") != std::string::npos);
  CHECK_FALSE(r[0].observables[0].value.has_value());
}

TEST_CASE("sums fire before unless is evaluated") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 1});
  auto y = p.vocab.declare({"y", 0, 1});
  p.main = par({sum({{store::truth(), tell(store::eq(x, 1))}}),
                unless(store::eq(x, 1), tell(store::eq(y, 1)))});
  p.observables = {y};
  auto r = run(share(p), {}, 2);
  CHECK_FALSE(r[1].observables[0].value.has_value());
}

TEST_CASE("a when whose guard never holds leaves no trace") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 5});
  auto y = p.vocab.declare({"y", 0, 5});
  p.main = when(store::eq(x, 3), next(tell(store::eq(y, 1))));
  p.observables = {y};
  for (const auto &r : run(share(p), {{}, {store::eq(x, 3)}}, 4))
    CHECK_FALSE(r.observables[0].value.has_value());
}

TEST_CASE("inconsistent tells are fatal and name the unit") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 5});
  p.main = next(par({tell(store::eq(x, 1)), tell(store::eq(x, 2))}));
  Engine e(share(p));
  e.step();
  try {
    e.step();
    FAIL("expected an engine error");
  } catch (const EngineError &err) {
    CHECK(err.unit == 1);
    CHECK(err.constraint.has_value());
  }
  CHECK_THROWS_AS(e.step(), EngineError);
}

TEST_CASE("parameter arithmetic overflow is fatal") {
  Program p;
  auto x = p.vocab.declare({"x", std::numeric_limits<store::Value>::min(),
                            std::numeric_limits<store::Value>::max()});
  p.defs.push_back({"Grow", 1,
                    par({tell(atom(x, RelOp::Eq, param(0))),
                         next(call("Grow", {param(0) * param(0)}))})});
  p.main = call("Grow", {1 << 20});
  Engine e(share(p));
  e.step(); // x = 2^20
  e.step(); // x = 2^40
  CHECK_THROWS_AS(e.step(), EngineError);
}

TEST_CASE("exclusive ignores re-triggers until released") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 1});
  auto body = exclusive(7, par({emit({"start", "job", {}, {}}),
                                delay(3, par({release(7), emit({"stop", "job", {}, {}})}))}),
                        "job");
  p.main = bang(when(store::eq(x, 1), body));
  std::vector<std::vector<store::Constraint>> envs(6, {store::eq(x, 1)});
  auto r = run(share(p), envs, 6);
  CHECK(r[0].events.size() == 1);
  CHECK(r[1].warnings.size() == 1);
  CHECK(r[2].warnings.size() == 1);
  // Released at unit 3 before the re-trigger of unit 3 is considered.
  REQUIRE(r[3].events.size() == 2);
  CHECK(r[3].events[0].kind == "stop");
  CHECK(r[3].events[1].kind == "start");
  CHECK(r[3].warnings.empty());
}

TEST_CASE("delay zero runs in the current unit") {
  Program p;
  auto x = p.vocab.declare({"x", 0, 1});
  p.main = delay(0, tell(store::eq(x, 1)));
  p.observables = {x};
  CHECK(run(share(p), {}, 1)[0].observables[0].value == 1);
}

TEST_CASE("property: delay(d) matches d nested nexts") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testing::ProgramGen gen(seed, {.max_agents = 4, .allow_emit = true});
    const std::size_t d = seed % 6;
    auto body = gen.agent();
    auto context = gen.agent();
    auto envs = gen.envs(8, 1);
    Program a = gen.empty_program();
    a.main = par({context, delay(static_cast<store::Value>(d), body)});
    Program b = gen.empty_program();
    b.main = par({context, next_n(d, body)});
    auto ra = testing::engine_run(share(a), envs, 8);
    auto rb = testing::engine_run(share(b), envs, 8);
    CHECK(ra.fault_unit == rb.fault_unit);
    REQUIRE(ra.units.size() == rb.units.size());
    for (std::size_t u = 0; u < ra.units.size(); ++u)
      CHECK(ra.units[u].domains == rb.units[u].domains);
  }
}

TEST_CASE("engine agrees with the reference evaluator on small programs") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    testing::ProgramGen gen(1000 + seed);
    Program p = gen.empty_program();
    p.main = gen.agent();
    auto envs = gen.envs(3, 2);
    auto prog = share(p);
    auto ref = testing::reference_run(*prog, envs, 3);
    auto eng = testing::engine_run(prog, envs, 3);
    CHECK(ref.fault_unit == eng.fault_unit);
    REQUIRE(ref.units.size() == eng.units.size());
    for (std::size_t u = 0; u < ref.units.size(); ++u)
      CHECK(ref.units[u].domains == eng.units[u].domains);
  }
}

TEST_CASE("property: bang(P) matches P || next bang(P)") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    testing::ProgramGen gen(5000 + seed, {.max_agents = 4, .allow_emit = true});
    auto body = gen.agent();
    auto envs = gen.envs(6, 1);
    Program a = gen.empty_program();
    a.main = bang(body);
    Program b = gen.empty_program();
    b.main = par({body, next(bang(body))});
    auto ra = testing::engine_run(share(a), envs, 6);
    auto rb = testing::engine_run(share(b), envs, 6);
    CHECK(ra.fault_unit == rb.fault_unit);
    REQUIRE(ra.units.size() == rb.units.size());
    for (std::size_t u = 0; u < ra.units.size(); ++u) {
      CHECK(ra.units[u].domains == rb.units[u].domains);
      CHECK(ra.units[u].events.size() == rb.units[u].events.size());
    }
  }
}
