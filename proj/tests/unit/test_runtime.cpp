#include "doctest.h"

#include "branchscore/format/score_format.hpp"
#include "branchscore/runtime/bench.hpp"
#include "branchscore/runtime/runner.hpp"
#include "literal_system.hpp"

#include <fstream>
#include <sstream>

using namespace branchscore;
using runtime::Assignment;
using runtime::parse_assignment;

namespace {

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string golden(const std::string &name) {
  return read_file(std::string(BRANCHSCORE_SOURCE_DIR) + "/tests/golden/" + name);
}

std::string trace_text(const score::CompiledScore &cs, const runtime::Script &script,
                       runtime::RunOptions opts = {}) {
  std::ostringstream out, log;
  runtime::run(cs, script, opts, [&](const auto &r) { out << runtime::to_json_line(r, cs) << '\n'; }, log);
  return out.str();
}

runtime::Script finish_at(std::uint64_t n) {
  runtime::Script s;
  if (n > 0)
    s.add({"finish", 0, 0, n - 1});
  s.add({"finish", 1, n, std::nullopt});
  return s;
}

} // namespace

TEST_CASE("parse_assignment") {
  CHECK(parse_assignment("finish=1") == Assignment{"finish", 1, 0, std::nullopt});
  CHECK(parse_assignment("finish=1@20") == Assignment{"finish", 1, 20, std::nullopt});
  CHECK(parse_assignment("finish=1@20..") == Assignment{"finish", 1, 20, std::nullopt});
  CHECK(parse_assignment("x=-3@2..5") == Assignment{"x", -3, 2, 5});
  for (const char *bad : {"finish", "=1", "finish=", "finish=a", "finish=1@", "finish=1@5..2", "finish=1@x"})
    CHECK_THROWS_AS(parse_assignment(bad), std::invalid_argument);
}

TEST_CASE("script: latest start wins, ties go to the last added") {
  runtime::Script s;
  s.add({"x", 1, 0, std::nullopt});
  s.add({"x", 2, 5, 9});
  s.add({"y", 3, 5, 5});
  s.add({"y", 4, 5, 5});
  using V = std::vector<std::pair<std::string, store::Value>>;
  CHECK(s.at(0) == V{{"x", 1}});
  CHECK(s.at(5) == V{{"x", 2}, {"y", 4}});
  CHECK(s.at(9) == V{{"x", 2}});
  CHECK(s.at(10) == V{{"x", 1}});
}

TEST_CASE("runner rejects unknown variables and out-of-range values") {
  const auto cs = score::compile_score(score::example_score());
  runtime::Runner r(cs, {});
  CHECK_THROWS_AS(r.step({{"nope", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(r.step({{"finish", 2}}), std::invalid_argument);
  CHECK(r.step({{"finish", 1}}).unit == 0);
}

TEST_CASE("runner stops at the end point or max units") {
  const auto cs = score::compile_score(score::example_score());
  std::ostringstream log;
  std::size_t n = 0;
  auto sum = runtime::run(cs, finish_at(20), {}, [&](const auto &) { ++n; }, log);
  CHECK(sum.ended);
  CHECK(sum.units == 22);
  CHECK(n == 22);
  runtime::RunOptions opts;
  opts.max_units = 5;
  sum = runtime::run(cs, {}, opts, [](const auto &) {}, log);
  CHECK_FALSE(sum.ended);
  CHECK(sum.units == 5);
}

TEST_CASE("runner reset replays the same trace") {
  const auto cs = score::compile_score(score::example_score());
  runtime::Runner r(cs, {});
  std::vector<std::string> first, second;
  for (int u = 0; u < 10; ++u)
    first.push_back(runtime::to_json_line(r.step({{"finish", 0}}), cs));
  r.reset();
  for (int u = 0; u < 10; ++u)
    second.push_back(runtime::to_json_line(r.step({{"finish", 0}}), cs));
  CHECK(first == second);
}

TEST_CASE("timing adds compute_us and nothing else") {
  const auto cs = score::compile_score(score::example_score());
  runtime::RunOptions opts;
  opts.timing = true;
  const auto timed = trace_text(cs, finish_at(20), opts);
  CHECK(timed.find("\"compute_us\"") != std::string::npos);
  std::istringstream a(timed), b(trace_text(cs, finish_at(20)));
  std::string la, lb;
  while (std::getline(a, la) && std::getline(b, lb)) {
    auto j = nlohmann::json::parse(la);
    j.erase("compute_us");
    CHECK(j == nlohmann::json::parse(lb));
  }
}

TEST_CASE("paced run keeps every unit") {
  const auto cs = score::compile_score(score::example_score());
  runtime::RunOptions opts;
  opts.tick = std::chrono::milliseconds(2);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(trace_text(cs, finish_at(0), opts) == golden("loop_finish_at_0.jsonl"));
  CHECK(std::chrono::steady_clock::now() - t0 >= std::chrono::milliseconds(14));
}

TEST_CASE("golden traces") {
  const auto cs = score::compile_score(score::example_score());
  CHECK(trace_text(cs, finish_at(20)) == golden("loop_finish_at_20.jsonl"));
  CHECK(trace_text(cs, finish_at(0)) == golden("loop_finish_at_0.jsonl"));
  runtime::RunOptions opts;
  opts.max_units = 12;
  CHECK(trace_text(cs, {}, opts) == golden("loop_finish_unknown.jsonl"));
}

TEST_CASE("bundled score file gives the golden trace") {
  const auto cs =
      score::compile_score(format::load_score(std::string(BRANCHSCORE_SOURCE_DIR) + "/scores/loop.score.json"));
  CHECK(trace_text(cs, finish_at(20)) == golden("loop_finish_at_20.jsonl"));
}

TEST_CASE("traces are deterministic across runs and seeds of the lowest policy") {
  const auto cs = score::compile_score(score::example_score());
  const auto ref = trace_text(cs, finish_at(20));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    runtime::RunOptions opts;
    opts.engine.seed = seed;
    CHECK(trace_text(cs, finish_at(20), opts) == ref);
  }
  runtime::RunOptions rnd;
  rnd.engine.policy = ntcc::SumPolicy::SeededRandom;
  rnd.engine.seed = 7;
  CHECK(trace_text(cs, finish_at(20), rnd) == trace_text(cs, finish_at(20), rnd));
}

TEST_CASE("hand-written System_n matches the compiled score") {
  const auto cs = score::compile_score(score::example_score());
  for (store::Value n : {0, 7, 8, 20}) {
    CAPTURE(n);
    const auto literal = testing::run_literal_system(n, 30);
    const auto compiled = ntcc::run(cs.program, [&] {
      std::vector<std::vector<store::Constraint>> env(30);
      for (std::size_t u = 0; u < env.size(); ++u)
        env[u].push_back(store::eq(*cs.variable("finish"), static_cast<store::Value>(u) < n ? 0 : 1));
      return env;
    }(), 30);
    REQUIRE(literal.size() == compiled.size());
    for (std::size_t u = 0; u < literal.size(); ++u) {
      CAPTURE(u);
      CHECK(literal[u] == testing::system_unit(cs, compiled[u]));
    }
  }
}

TEST_CASE("User_n in parallel with the compiled score gives the scripted trace") {
  const auto cs = score::compile_score(score::example_score());
  auto prog = std::make_shared<const ntcc::Program>(testing::with_user(cs, 20));
  std::string text;
  for (const auto &tick : ntcc::run(prog, {}, 22))
    text += runtime::to_json_line(runtime::make_record(cs, tick), cs) + "\n";
  CHECK(text == golden("loop_finish_at_20.jsonl"));
}

TEST_CASE("bench runs every depth to its end point") {
  std::vector<int> seen;
  auto rows = runtime::run_bench({2, 4, 3}, [&](const auto &r) { seen.push_back(r.n); });
  CHECK(seen == std::vector<int>{2, 3, 4});
  REQUIRE(rows.size() == 3);
  for (const auto &r : rows) {
    CHECK(r.points == static_cast<std::size_t>(3 * (1 << r.n) - 2));
    CHECK(r.ticks == static_cast<std::size_t>(3 * (2 * r.n + 1)));
    CHECK(r.mean_ms <= r.max_ms);
  }
  CHECK(runtime::bench_json(rows)["rows"].size() == 3);
  CHECK_THROWS_AS(runtime::run_bench({5, 4, 1}), std::invalid_argument);
}
