// branchscore: validate, run, benchmark and serve interactive scores.

#include "branchscore/format/score_format.hpp"
#include "branchscore/live/server.hpp"
#include "branchscore/runtime/bench.hpp"
#include "branchscore/runtime/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace branchscore;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kIo = 2;

struct Exit {
  int code;
};

std::uint64_t env_u64(const char *name, std::uint64_t fallback) {
  const char *v = std::getenv(name);
  if (!v || !*v)
    return fallback;
  try {
    return std::stoull(v);
  } catch (const std::exception &) {
    std::cerr << "error: " << name << " must be a non-negative integer\n";
    throw Exit{kDomain};
  }
}

score::Score load(const std::string &path) {
  try {
    return format::load_score(path);
  } catch (const format::IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    throw Exit{kIo};
  } catch (const format::FormatError &e) {
    std::cerr << path << ":" << e.what() << '\n';
    throw Exit{kDomain};
  }
}

// Prints diagnostics; exits with kDomain if any is an error.
void check(const std::string &path, const score::Score &s, bool quiet_ok) {
  const auto ds = score::validate_score(s);
  for (const auto &d : ds)
    std::cerr << path << ": " << score::format(d) << '\n';
  if (score::has_errors(ds)) {
    std::cerr << score::count(ds, score::Severity::Error) << " error(s)\n";
    throw Exit{kDomain};
  }
  if (!quiet_ok)
    std::cout << path << ": ok, " << s.points.size() << " points, " << s.intervals.size() << " intervals, "
              << score::count(ds, score::Severity::Warning) << " warning(s), "
              << score::count(ds, score::Severity::Note) << " note(s)\n";
}

ntcc::EngineOptions engine_options(const std::string &policy, std::uint64_t seed) {
  ntcc::EngineOptions o;
  o.seed = seed;
  if (policy == "lowest")
    o.policy = ntcc::SumPolicy::LowestIndex;
  else if (policy == "random")
    o.policy = ntcc::SumPolicy::SeededRandom;
  else {
    std::cerr << "error: policy must be lowest or random\n";
    throw Exit{kDomain};
  }
  return o;
}

int cmd_validate(const std::string &path) {
  auto s = load(path);
  check(path, s, false);
  const auto cs = score::compile_score(s);
  const auto &sum = cs.summary;
  std::cout << "compiled: " << sum.choice_points << " choice, " << sum.wait_for_all_points << " wait-for-all, "
            << sum.jump_to_all_points << " jump-to-all points; " << sum.interval_agents << " interval agents; "
            << sum.variables << " variables\n";
  return kOk;
}

struct RunArgs {
  std::string path;
  int tick_ms = 0;
  std::uint64_t seed = 0;
  std::string policy = "lowest";
  std::vector<std::string> sets;
  std::uint64_t max_units = 10000;
  std::string trace;
  bool timing = false;
};

int cmd_run(const RunArgs &a) {
  if (a.max_units < 1) {
    std::cerr << "error: max-units must be ≥ 1\n";
    return kDomain;
  }
  if (a.tick_ms < 0) {
    std::cerr << "error: tick-ms must be ≥ 0\n";
    return kDomain;
  }
  auto s = load(a.path);
  check(a.path, s, true);
  const auto cs = score::compile_score(s);

  runtime::Script script;
  for (const auto &text : a.sets) {
    try {
      auto as = runtime::parse_assignment(text);
      if (!cs.variable(as.var)) {
        std::cerr << "error: unknown variable " << as.var << " in --set " << text << '\n';
        return kDomain;
      }
      script.add(std::move(as));
    } catch (const std::invalid_argument &e) {
      std::cerr << "error: " << e.what() << '\n';
      return kDomain;
    }
  }

  std::ofstream file;
  if (!a.trace.empty()) {
    file.open(a.trace, std::ios::binary | std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot write " << a.trace << '\n';
      return kIo;
    }
  }
  std::ostream &out = a.trace.empty() ? std::cout : file;

  runtime::RunOptions opts;
  opts.tick = std::chrono::milliseconds(a.tick_ms);
  opts.engine = engine_options(a.policy, a.seed);
  opts.max_units = a.max_units;
  opts.timing = a.timing;
  try {
    auto summary = runtime::run(
        cs, script, opts,
        [&](const runtime::TraceRecord &r) {
          out << runtime::to_json_line(r, cs) << '\n';
          if (opts.tick.count() > 0)
            out.flush();
        },
        std::cerr);
    out.flush();
    if (!out) {
      std::cerr << "error: failed writing trace\n";
      return kIo;
    }
    std::cerr << "ran " << summary.units << " unit(s)" << (summary.ended ? ", end point reached" : "")
              << (summary.overruns ? ", " + std::to_string(summary.overruns) + " overrun(s)" : "") << '\n';
  } catch (const ntcc::EngineError &e) {
    out.flush();
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  }
  return kOk;
}

int cmd_bench(int lo, int hi, int runs, const std::string &out_path) {
  runtime::BenchOptions o{lo, hi, runs};
  std::vector<runtime::BenchRow> rows;
  try {
    std::cout << runtime::bench_table({});
    rows = runtime::run_bench(o, [](const runtime::BenchRow &r) {
      auto line = runtime::bench_table({r});
      std::cout << line.substr(line.find('\n') + 1) << std::flush;
    });
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::trunc);
    f << runtime::bench_json(rows).dump(2) << '\n';
    if (!f) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return kIo;
    }
  }
  return kOk;
}

int cmd_serve(const std::string &path, int tick_ms, std::uint64_t port, const std::string &address,
              std::uint64_t seed, const std::string &policy) {
  if (tick_ms < 1) {
    std::cerr << "error: tick-ms must be ≥ 1\n";
    return kDomain;
  }
  if (port > 65535) {
    std::cerr << "error: port must be ≤ 65535\n";
    return kDomain;
  }
  auto s = load(path);
  check(path, s, true);
  auto cs = std::make_shared<const score::CompiledScore>(score::compile_score(s));
  live::Session session(cs, {engine_options(policy, seed), std::chrono::milliseconds(tick_ms)});
  try {
    live::ServerOptions so;
    so.address = address;
    so.port = static_cast<std::uint16_t>(port);
    so.handle_signals = true;
    live::Server server(session, so, std::cerr);
    server.start();
    std::cerr << "serving " << path << " on ws://" << address << ":" << server.port() << " (tick " << tick_ms
              << " ms)\n";
    server.wait();
    server.stop();
  } catch (const std::system_error &e) {
    std::cerr << "error: cannot listen on " << address << ":" << port << ": " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Interactive scores with conditional branching"};
  app.require_subcommand(1);

  std::string path;
  auto *validate = app.add_subcommand("validate", "Check a score file");
  validate->add_option("file", path, "Score file")->required();

  RunArgs ra;
  auto *run = app.add_subcommand("run", "Run a score and print one trace record per unit");
  run->add_option("file", ra.path, "Score file")->required();
  run->add_option("--tick-ms", ra.tick_ms, "Wall-clock length of a unit; 0 runs unpaced");
  run->add_option("--seed", ra.seed, "Seed for the random choice policy (default $BRANCHSCORE_SEED or 0)");
  run->add_option("--policy", ra.policy, "Choice policy: lowest or random");
  run->add_option("--set", ra.sets, "var=value[@u | @a..b | @a..], repeatable");
  run->add_option("--max-units", ra.max_units, "Stop after this many units");
  run->add_option("--trace", ra.trace, "Write the trace here instead of stdout");
  run->add_flag("--timing", ra.timing, "Add compute_us to each record");

  int n_low = 2, n_high = 10, runs = 100;
  std::string report;
  auto *bench = app.add_subcommand("bench", "Tick-time benchmark over generated scores");
  bench->add_option("--n-low", n_low, "Smallest tree depth");
  bench->add_option("--n-high", n_high, "Largest tree depth");
  bench->add_option("--runs", runs, "Runs per depth");
  bench->add_option("--out", report, "Write a JSON report here");

  std::string serve_path, address = "127.0.0.1", serve_policy = "lowest";
  int serve_tick = 100;
  std::uint64_t port = 0, serve_seed = 0;
  auto *serve = app.add_subcommand("serve", "Host a score over WebSocket");
  serve->add_option("file", serve_path, "Score file")->required();
  serve->add_option("--tick-ms", serve_tick, "Wall-clock length of a unit");
  serve->add_option("--port", port, "Port (default $BRANCHSCORE_PORT or 8737)");
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--seed", serve_seed, "Seed for the random choice policy");
  serve->add_option("--policy", serve_policy, "Choice policy: lowest or random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDomain;
  }

  try {
    if (*validate)
      return cmd_validate(path);
    if (*run) {
      if (run->count("--seed") == 0)
        ra.seed = env_u64("BRANCHSCORE_SEED", 0);
      return cmd_run(ra);
    }
    if (*bench)
      return cmd_bench(n_low, n_high, runs, report);
    if (*serve) {
      if (serve->count("--port") == 0)
        port = env_u64("BRANCHSCORE_PORT", 8737);
      if (serve->count("--seed") == 0)
        serve_seed = env_u64("BRANCHSCORE_SEED", 0);
      return cmd_serve(serve_path, serve_tick, port, address, serve_seed, serve_policy);
    }
  } catch (const Exit &e) {
    return e.code;
  }
  return kOk;
}
