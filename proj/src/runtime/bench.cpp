#include "branchscore/runtime/bench.hpp"

#include "branchscore/format/score_format.hpp"
#include "branchscore/runtime/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace branchscore::runtime {

std::vector<BenchRow> run_bench(const BenchOptions &options,
                                const std::function<void(const BenchRow &)> &on_row) {
  if (options.n_low < 1 || options.n_high > 16 || options.n_low > options.n_high)
    throw std::invalid_argument("bench depths must satisfy 1 <= n-low <= n-high <= 16");
  if (options.runs < 1)
    throw std::invalid_argument("runs must be >= 1");

  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (int n = options.n_low; n <= options.n_high; ++n) {
    const auto row_start = clock::now();
    const auto s = format::generate_benchmark(n);
    const auto cs = score::compile_score(s);
    BenchRow row;
    row.n = n;
    row.points = s.points.size();
    row.intervals = s.intervals.size();
    row.runs = options.runs;
    std::vector<double> ms;
    const auto limit = static_cast<std::uint64_t>(4 * n + 4);
    for (int r = 0; r < options.runs; ++r) {
      Runner runner(cs, {});
      while (!runner.ended()) {
        if (runner.unit() >= limit)
          throw std::logic_error("benchmark end point not reached by unit " + std::to_string(limit));
        const auto t0 = clock::now();
        (void)runner.step();
        ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
      }
    }
    row.ticks = ms.size();
    double sum = 0;
    for (double v : ms)
      sum += v;
    row.mean_ms = sum / static_cast<double>(ms.size());
    std::sort(ms.begin(), ms.end());
    row.max_ms = ms.back();
    row.p95_ms = ms[std::min(ms.size() - 1, static_cast<std::size_t>(0.95 * static_cast<double>(ms.size())))];
    row.wall_s = std::chrono::duration<double>(clock::now() - row_start).count();
    if (on_row)
      on_row(row);
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow> &rows) {
  std::string out = "  n  points  intervals  runs   ticks   mean ms    p95 ms    max ms\n";
  char line[128];
  for (const auto &r : rows) {
    std::snprintf(line, sizeof line, "%3d %7zu %10zu %5d %7zu %9.3f %9.3f %9.3f\n", r.n, r.points,
                  r.intervals, r.runs, r.ticks, r.mean_ms, r.p95_ms, r.max_ms);
    out += line;
  }
  return out;
}

nlohmann::ordered_json bench_json(const std::vector<BenchRow> &rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto &r : rows)
    arr.push_back({{"n", r.n},
                   {"points", r.points},
                   {"intervals", r.intervals},
                   {"runs", r.runs},
                   {"ticks", r.ticks},
                   {"mean_ms", r.mean_ms},
                   {"p95_ms", r.p95_ms},
                   {"max_ms", r.max_ms},
                   {"wall_s", r.wall_s}});
  return {{"rows", std::move(arr)}};
}

} // namespace branchscore::runtime
